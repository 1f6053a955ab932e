use std::fs;
use std::path::Path;

use meanbirds::config::{PipelineConfig, Stage};
use meanbirds::io;
use meanbirds::pipeline::{Pipeline, BATCHES, FEATURES, GROUNDTRUTH, MANIFEST, MODEL, PREDICTIONS, REPORT};
use meanbirds_core::features::FeatureVector;

fn small(out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig {
        out_dir: out.to_path_buf(),
        ..PipelineConfig::default()
    };
    c.synth.users = 150;
    c.train.folds = 3;
    c.train.repeats = 2;
    c
}

#[test]
fn stage_subset_stops_after_batches() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.stages = Some(vec![Stage::Synth]);
    Pipeline::new(config.clone()).unwrap().run().unwrap();
    config.stages = Some(vec![Stage::Spamfilter, Stage::Sessionize]);
    let report = Pipeline::new(config).unwrap().run().unwrap();
    assert_eq!(report.executed, vec![Stage::Spamfilter, Stage::Sessionize]);
    assert!(dir.path().join(BATCHES).exists());
    assert!(!dir.path().join(GROUNDTRUTH).exists());
    assert!(!dir.path().join(FEATURES).exists());
}

#[test]
fn missing_upstream_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.stages = Some(vec![Stage::Train]);
    let err = Pipeline::new(config.clone()).unwrap().run().unwrap_err();
    assert!(format!("{err:#}").contains("run stage `extract` first"), "{err:#}");
    config.stages = Some(vec![Stage::Spamfilter]);
    let err = Pipeline::new(config).unwrap().run().unwrap_err();
    assert!(format!("{err:#}").contains("`synth` or `ingest`"), "{err:#}");
}

#[test]
fn rerun_is_a_no_op_and_changes_rerun_only_what_they_touch() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path());
    let first = Pipeline::new(config.clone()).unwrap().run().unwrap();
    assert_eq!(first.executed.len(), 7);
    let report = fs::read(dir.path().join(REPORT)).unwrap();
    let manifest = fs::read(dir.path().join(MANIFEST)).unwrap();

    let again = Pipeline::new(config.clone()).unwrap().run().unwrap();
    assert!(again.executed.is_empty());
    assert_eq!(fs::read(dir.path().join(MANIFEST)).unwrap(), manifest);

    let mut more_trees = config.clone();
    more_trees.train.trees = 5;
    let r = Pipeline::new(more_trees).unwrap().run().unwrap();
    assert_eq!(r.executed, vec![Stage::Train]);

    // Deleting an artifact makes its stage run again with identical output.
    fs::remove_file(dir.path().join(MODEL)).unwrap();
    let r = Pipeline::new(config).unwrap().run().unwrap();
    assert_eq!(r.executed, vec![Stage::Train]);
    assert_eq!(fs::read(dir.path().join(REPORT)).unwrap(), report);
}

#[test]
fn config_file_paths_are_relative_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pipeline.toml");
    fs::write(&cfg, "seed = 11\nworkers = 2\nout_dir = \"artifacts\"\n[synth]\nusers = 120\n[train]\nfolds = 3\nrepeats = 1\n").unwrap();
    let config = PipelineConfig::load(&cfg).unwrap();
    assert_eq!(config.out_dir, dir.path().join("artifacts"));
    assert_eq!(config.workers, 2);
    Pipeline::new(config).unwrap().run().unwrap();
    let rows: Vec<serde_json::Value> = io::read_jsonl(&dir.path().join("artifacts").join(PREDICTIONS)).unwrap();
    assert!(!rows.is_empty());
}

#[test]
fn ingest_reports_bad_lines_and_loads_good_files() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = dir.path().join("tweets.jsonl");
    let accounts = dir.path().join("accounts.jsonl");
    fs::write(&accounts, "{\"user_id\":\"a\",\"account_created_at\":10}\n").unwrap();
    fs::write(&tweets, "{\"tweet_id\":\"1\",\"user_id\":\"a\",\"created_at\":100,\"text\":\"hi\"}\n{\"tweet_id\":\"2\",\"user_id\":\"a\",\"text\":\"no time\"}\n").unwrap();
    let mut config = small(&dir.path().join("out"));
    config.input.tweets = Some(tweets.clone());
    config.input.accounts = Some(accounts.clone());
    config.stages = Some(vec![Stage::Ingest]);
    let err = Pipeline::new(config.clone()).unwrap().run().unwrap_err();
    assert!(format!("{err:#}").contains("tweets.jsonl:2"), "{err:#}");

    fs::write(&tweets, "{\"tweet_id\":\"1\",\"user_id\":\"a\",\"created_at\":100,\"text\":\"hi\"}\n{\"tweet_id\":\"2\",\"user_id\":\"ghost\",\"created_at\":100,\"text\":\"x\"}\n").unwrap();
    Pipeline::new(config).unwrap().run().unwrap();
    let summary: serde_json::Value = io::read_json(&dir.path().join("out/load_summary.json")).unwrap();
    assert_eq!(summary["tweets_kept"], 1);
    assert_eq!(summary["rejected_unknown_user"], 1);
}

#[test]
fn features_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.stages = Some(vec![Stage::Synth, Stage::Spamfilter, Stage::Sessionize, Stage::Graph, Stage::Extract]);
    Pipeline::new(config).unwrap().run().unwrap();
    let path = dir.path().join(FEATURES);
    let header = fs::read_to_string(&path).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 31);
    let rows: Vec<FeatureVector> = io::read_features_csv(&path).unwrap();
    assert!(!rows.is_empty());
    let copy = dir.path().join("copy.csv");
    io::write_features_csv(&copy, &rows).unwrap();
    assert_eq!(io::read_features_csv(&copy).unwrap(), rows);
    assert_eq!(fs::read(&copy).unwrap(), fs::read(&path).unwrap());
}

#[test]
fn annotate_reads_the_service_log() {
    use meanbirds::config::AnnotationSource;
    use meanbirds::service::{AssignmentResponse, LabelSubmission, Registration, Service, ServiceConfig, SystemClock};
    use meanbirds_core::groundtruth::{Demographics, UserLabel};
    use meanbirds_core::sessionizer::Batch;

    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.stages = Some(vec![Stage::Synth, Stage::Spamfilter, Stage::Sessionize]);
    Pipeline::new(config.clone()).unwrap().run().unwrap();

    let batches: Vec<Batch> = io::read_jsonl(&dir.path().join(BATCHES)).unwrap();
    let mut gold = batches[0].clone();
    gold.batch_id = "gold".into();
    gold.is_control = true;
    gold.gold_label = Some(meanbirds_core::Label::Normal);
    let log = dir.path().join("service_log.jsonl");
    let service = Service::open(ServiceConfig::default(), batches, vec![gold], &[], &log, Box::new(SystemClock)).unwrap();
    for k in 0.. {
        let w = service
            .register(Registration {
                token: format!("t{k}"),
                demographics: Demographics::default(),
            })
            .unwrap();
        let AssignmentResponse::Assigned { batch_ids, .. } = service.assignment(&w).unwrap() else {
            break;
        };
        for b in batch_ids {
            let label = if b.len() % 2 == 0 { "normal" } else { "bully" };
            service
                .submit(LabelSubmission {
                    worker_id: w.clone(),
                    batch_id: b,
                    label: label.into(),
                })
                .unwrap();
        }
    }

    config.stages = Some(vec![Stage::Annotate]);
    config.annotate.source = AnnotationSource::Records;
    config.annotate.records = Some(log);
    Pipeline::new(config).unwrap().run().unwrap();
    let users: Vec<UserLabel> = io::read_jsonl(&dir.path().join(GROUNDTRUTH)).unwrap();
    assert_eq!(users, service.export().users);
    assert!(!users.is_empty());
}
