mod common;

use std::sync::Arc;

use pyloc_core::backends::{FixtureStore, ReplayBackend};
use pyloc_core::pipeline::{run_pipeline, PipelineBackends, PipelineRun, Resources};
use pyloc_core::{scan, KeywordSet};

use common::{data_dir, greek_config, lines};

fn replay_run() -> PipelineRun {
    let store = Arc::new(FixtureStore::load(&data_dir().join("greek_fixtures.json")).unwrap());
    let replay = ReplayBackend::new(store);
    let config = greek_config();
    let resources = Resources::load(&config).unwrap();
    let backends = PipelineBackends { generation: Some(&replay), translation: Some(&replay) };
    run_pipeline(&lines("greek_terms.txt"), &config, &resources, backends).unwrap()
}

fn record<'a>(run: &'a PipelineRun, english: &str) -> &'a pyloc_core::lexicon::TermRecord {
    run.lexicon.records().find(|r| r.english == english).unwrap()
}

#[test]
fn determiner_is_stripped_and_words_joined() {
    let run = replay_run();
    assert_eq!(record(&run, "abs").translation, "απόλυτη_τιμή");
    assert_eq!(record(&run, "float").translation, "αριθμός_κινητής_υποδιαστολής");
}

#[test]
fn unexpanded_term_keeps_lower_confidence() {
    let run = replay_run();
    let r = record(&run, "enumerate");
    assert_eq!(r.expansion, "-");
    assert_eq!(r.translation, "απαρίθμηση");
    assert_eq!(r.confidence, 0.5);
    assert_eq!(record(&run, "len").confidence, 1.0);
}

#[test]
fn bad_translations_are_reported_not_written() {
    let run = replay_run();
    assert_eq!(run.report.sentinels, vec!["bool".to_string()]);
    assert_eq!(run.report.flagged.len(), 1);
    assert_eq!(run.report.flagged[0].english, "ord");
    assert!(run.lexicon.forward("bool").is_none());
    assert!(run.lexicon.forward("ord").is_none());
}

#[test]
fn every_target_scans_as_one_name() {
    let run = replay_run();
    let kw = KeywordSet::python310();
    for r in run.lexicon.records() {
        let stream = scan(&r.translation, &kw).unwrap();
        let names: Vec<_> = stream.tokens().iter().filter(|t| !t.text.is_empty()).collect();
        assert_eq!(names.len(), 1, "{} -> {}", r.english, r.translation);
        assert_eq!(names[0].text, r.translation);
    }
}

#[test]
fn report_json_has_digests() {
    let run = replay_run();
    let json: serde_json::Value = serde_json::from_str(&run.report.to_json()).unwrap();
    assert_eq!(json["language"], "el");
    assert_eq!(json["input_terms"], 30);
    assert_eq!(json["output_digest"].as_str().unwrap().len(), 64);
}
