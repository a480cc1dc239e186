#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pyloc_core::backends::{
    BackendError, FixtureStore, GenerationBackend, RecordingBackend, TranslationBackend,
};
use pyloc_core::pipeline::{run_pipeline, PipelineBackends, PipelineConfig, PipelineRun, Resources};
use pyloc_core::prompts::ExpansionStrategy;
use pyloc_core::termtrans::TranslationMethod;
use pyloc_core::Language;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap()
}

pub fn lines(name: &str) -> Vec<String> {
    read_data(name).lines().map(str::to_owned).collect()
}

/// `(file name, contents)` for every `.py` file in a data subdirectory, sorted by name.
pub fn python_files(sub: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(data_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "py"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

/// Expansions the scripted model knows. `enumerate` is left out on purpose.
pub const GREEK_EXPANSIONS: [(&str, &str); 29] = [
    ("abs", "absolute value"),
    ("len", "length"),
    ("print", "print"),
    ("str", "string"),
    ("int", "integer"),
    ("dict", "dictionary"),
    ("list", "list"),
    ("max", "maximum"),
    ("min", "minimum"),
    ("sum", "sum"),
    ("pow", "power"),
    ("round", "round"),
    ("open", "open"),
    ("input", "input"),
    ("range", "range"),
    ("sorted", "sorted"),
    ("reversed", "reversed"),
    ("zip", "zip"),
    ("map", "map"),
    ("filter", "filter"),
    ("isinstance", "is instance"),
    ("getattr", "get attribute"),
    ("hasattr", "has attribute"),
    ("chr", "character"),
    ("ord", "ordinal"),
    ("bool", "boolean"),
    ("float", "floating point number"),
    ("tuple", "tuple"),
    ("set", "set"),
];

/// English phrase → Greek. `boolean` comes back empty and `ordinal` is not an identifier.
pub const GREEK_TRANSLATIONS: [(&str, &str); 30] = [
    ("absolute value", "η απόλυτη τιμή"),
    ("length", "μήκος"),
    ("print", "εκτύπωση"),
    ("string", "συμβολοσειρά"),
    ("integer", "ακέραιος"),
    ("dictionary", "λεξικό"),
    ("list", "λίστα"),
    ("maximum", "μέγιστο"),
    ("minimum", "ελάχιστο"),
    ("sum", "άθροισμα"),
    ("power", "δύναμη"),
    ("round", "στρογγυλοποίηση"),
    ("open", "άνοιγμα"),
    ("input", "είσοδος"),
    ("range", "εύρος"),
    ("sorted", "ταξινομημένο"),
    ("reversed", "αντεστραμμένο"),
    ("zip", "συνένωση"),
    ("map", "αντιστοίχιση"),
    ("filter", "φίλτρο"),
    ("enumerate", "απαρίθμηση"),
    ("is instance", "είναι στιγμιότυπο"),
    ("get attribute", "πάρε χαρακτηριστικό"),
    ("has attribute", "έχει χαρακτηριστικό"),
    ("character", "χαρακτήρας"),
    ("ordinal", "τακτικός (αριθμός)"),
    ("boolean", ""),
    ("floating point number", "αριθμός κινητής υποδιαστολής"),
    ("tuple", "πλειάδα"),
    ("set", "σύνολο"),
];

/// Answers expansion prompts from a table, one `term => expansion` line per known term.
pub struct ScriptedModel(pub BTreeMap<String, String>);

impl ScriptedModel {
    pub fn greek() -> Self {
        ScriptedModel(GREEK_EXPANSIONS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
    }
}

impl GenerationBackend for ScriptedModel {
    fn generate(&self, prompt: &str) -> Result<String, BackendError> {
        let asked = prompt.rsplit(": ").next().unwrap_or_default();
        Ok(asked
            .split(", ")
            .map(str::trim)
            .filter_map(|t| self.0.get(t).map(|e| format!("{t} => {e}")))
            .collect::<Vec<_>>()
            .join("\n"))
    }
}

pub struct ScriptedMt(pub BTreeMap<String, String>);

impl ScriptedMt {
    pub fn greek() -> Self {
        ScriptedMt(GREEK_TRANSLATIONS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
    }
}

impl TranslationBackend for ScriptedMt {
    fn translate_text(&self, source: &str, _: &Language, _: &Language) -> Result<String, BackendError> {
        self.0
            .get(source)
            .cloned()
            .ok_or_else(|| BackendError::BadResponse(format!("unscripted `{source}`")))
    }
}

pub fn greek_config() -> PipelineConfig {
    let mut config = PipelineConfig::new(Language::new("el"));
    config.expansion_strategy = ExpansionStrategy::FiveShot;
    config.translation_method = TranslationMethod::MtNoCntxt;
    config
}

/// Runs the Greek pipeline against the scripted backends, recording every exchange.
pub fn record_greek_fixtures() -> (PipelineRun, FixtureStore) {
    let store = Arc::new(FixtureStore::new());
    let model = RecordingBackend::new(ScriptedModel::greek(), store.clone());
    let mt = RecordingBackend::new(ScriptedMt::greek(), store.clone());
    let config = greek_config();
    let resources = Resources::load(&config).unwrap();
    let backends = PipelineBackends { generation: Some(&model), translation: Some(&mt) };
    let run = run_pipeline(&lines("greek_terms.txt"), &config, &resources, backends).unwrap();
    (run, FixtureStore::from_entries(store.entries()))
}
