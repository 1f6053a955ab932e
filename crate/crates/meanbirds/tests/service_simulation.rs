//! Drive the service in-process with simulated raters and compare the
//! aggregated label distribution with the planted one.

use std::collections::BTreeMap;

use meanbirds::service::{AssignmentResponse, LabelSubmission, Registration, Service, ServiceConfig, SystemClock};
use meanbirds_core::groundtruth::Demographics;
use meanbirds_core::rng::rng_for_str;
use meanbirds_core::sessionizer::Batch;
use meanbirds_core::synth::ClassCounts;
use meanbirds_core::{Label, Tweet};
use rand::seq::SliceRandom;
use rand::Rng;

fn batch(id: String, gold: Option<Label>) -> Batch {
    Batch {
        user_id: id.clone(),
        source_session_id: id.clone(),
        tweets: vec![Tweet {
            tweet_id: format!("{id}-t"),
            user_id: id.clone(),
            created_at: 1,
            text: "hello".into(),
            hashtags: vec![],
            urls: vec![],
            mentions: vec![],
            is_retweet: false,
        }],
        batch_id: id,
        is_control: gold.is_some(),
        gold_label: gold,
    }
}

#[test]
fn noisy_raters_recover_planted_proportions() {
    let counts = ClassCounts::proportional(1000);
    let mut planted: Vec<Label> = Label::ALL.iter().flat_map(|&l| vec![l; counts.get(l)]).collect();
    planted.shuffle(&mut rng_for_str(5, "planted"));
    let truth: BTreeMap<String, Label> = planted.iter().enumerate().map(|(i, &l)| (format!("b{i:04}"), l)).collect();
    let batches = truth.keys().map(|id| batch(id.clone(), None)).collect();
    let controls = vec![batch("gold".into(), Some(Label::Bully))];
    let dir = tempfile::tempdir().unwrap();
    let service = Service::open(ServiceConfig::default(), batches, controls, &[], &dir.path().join("log"), Box::new(SystemClock)).unwrap();

    // Fixed confusion: 10% of answers go to a uniformly chosen wrong label.
    let mut worker = 0;
    loop {
        worker += 1;
        let id = service
            .register(Registration {
                token: format!("t{worker}"),
                demographics: Demographics::default(),
            })
            .unwrap();
        let mut rng = rng_for_str(9, &id);
        let AssignmentResponse::Assigned { batch_ids, .. } = service.assignment(&id).unwrap() else {
            break;
        };
        for b in batch_ids {
            let correct = truth.get(&b).copied().unwrap_or(Label::Bully);
            let label = if rng.random::<f64>() < 0.1 {
                let others: Vec<Label> = Label::ALL.into_iter().filter(|&l| l != correct).collect();
                others[rng.random_range(0..3)]
            } else {
                correct
            };
            service
                .submit(LabelSubmission {
                    worker_id: id.clone(),
                    batch_id: b,
                    label: label.as_str().into(),
                })
                .unwrap();
        }
    }

    let stats = service.stats();
    assert_eq!(stats.batches_complete, 1000);
    assert_eq!(stats.completion, 1.0);
    let resolved: usize = stats.distribution.values().sum();
    for l in Label::ALL {
        let got = stats.distribution.get(&l).copied().unwrap_or(0) as f64 / resolved as f64;
        let want = counts.get(l) as f64 / 1000.0;
        assert!((got - want).abs() <= 0.03, "{l}: {got} vs {want}");
    }
    assert!(service.label_counts().values().all(|&c| c == 5));
}
