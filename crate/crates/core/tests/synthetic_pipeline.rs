use std::collections::BTreeMap;

use meanbirds_core::features::{extract_all, Lexicons, SelectionMask};
use meanbirds_core::graph::{compute_metrics, IterConfig, SocialGraph};
use meanbirds_core::groundtruth::{export_ground_truth, simulate_raters, DEFAULT_PANEL};
use meanbirds_core::model::{cross_validate, evaluate, CvConfig, Dataset};
use meanbirds_core::sessionizer::{batchify, drop_inactive, sessionize_corpus, BatchBounds, SessionConfig};
use meanbirds_core::spamfilter::{filter_spammers, SpamConfig};
use meanbirds_core::synth::{generate, SpamStyle, SynthConfig};
use meanbirds_core::textprep::Emoticons;
use meanbirds_core::{Label, Sequential};

#[test]
fn spam_filter_separates_planted_classes() {
    let out = generate(&SynthConfig::proportional(1000), 7).unwrap();
    let (_, verdicts) = filter_spammers(&out.corpus, &SpamConfig::default(), &Emoticons::default(), &Sequential);
    let removed: BTreeMap<&str, bool> = verdicts.iter().map(|v| (v.user_id.as_str(), v.removed)).collect();
    for p in &out.planted {
        let gone = removed[p.user_id.as_str()];
        assert_eq!(gone, p.label == Label::Spammer, "{} planted {:?}", p.user_id, p.label);
    }
    let similar = verdicts.iter().filter(|v| v.intra_similarity > 0.8).count() as f64 / 1000.0;
    assert!((similar - 0.05).abs() <= 0.02, "{similar}");
    let near_dup = out.planted.iter().filter(|p| p.spam_style == Some(SpamStyle::NearDuplicate)).count();
    assert_eq!(near_dup, 50);
}

#[test]
fn every_user_has_a_full_session() {
    let out = generate(&SynthConfig::proportional(200), 3).unwrap();
    let sessions = sessionize_corpus(&out.corpus, SessionConfig::default().gap_seconds());
    assert_eq!(sessions.len(), 200);
    for (user, list) in &sessions {
        assert!(list.iter().any(|s| s.tweets.len() >= 5), "{user}");
    }
}

#[test]
fn three_class_model_recovers_planted_labels() {
    let out = generate(&SynthConfig::proportional(1000), 7).unwrap();
    let planted = out.planted_labels();
    let emoticons = Emoticons::default();
    let (kept, _) = filter_spammers(&out.corpus, &SpamConfig::default(), &emoticons, &Sequential);
    let active = drop_inactive(&kept, SessionConfig::default().min_tweets);
    let sessions = sessionize_corpus(&active, SessionConfig::default().gap_seconds());
    let batches: Vec<_> = sessions.values().flatten().flat_map(|s| batchify(s, BatchBounds::default())).collect();
    let records = simulate_raters(&batches, &planted, DEFAULT_PANEL, 0.1, 7);
    let truth = export_ground_truth(&records, &batches, DEFAULT_PANEL).resolved().into_iter().map(|(u, l)| (u.to_string(), l)).collect::<BTreeMap<_, _>>();

    let graph = SocialGraph::from_nodes_and_edges(out.corpus.accounts().keys(), out.edges.iter().map(|(a, b)| (a, b)));
    let (metrics, _) = compute_metrics(&graph, &IterConfig::default(), 7, &Sequential);
    let vectors = extract_all(&active, &sessions, &batches, &metrics, &Lexicons::bundled(), &Sequential);
    let mask = SelectionMask::model18();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut users = Vec::new();
    for v in &vectors {
        let Some(&l) = truth.get(&v.user_id) else { continue };
        if l == Label::Spammer {
            continue;
        }
        rows.push(v.masked(&mask).unwrap());
        labels.push(l);
        users.push(v.user_id.clone());
    }
    let data = Dataset::new(mask.names().to_vec(), rows, labels).unwrap();
    let cv = cross_validate(&data, &CvConfig::default(), 7, &Sequential).unwrap();
    let classes = data.classes();
    let planted_idx: Vec<usize> = users.iter().map(|u| classes.binary_search(&planted[u]).unwrap()).collect();
    let probs: Vec<Vec<f64>> = cv.out_of_fold.iter().map(|o| o.probabilities.clone()).collect();
    let m = evaluate(&classes, &planted_idx, &probs).unwrap();
    eprintln!("cv auc {:?} planted auc {:?} acc {}", cv.report.auc, m.auc, m.accuracy);
    assert!(m.auc.unwrap() >= 0.85);
}
