use std::sync::{Arc, Mutex};
use std::time::Duration;

use metamp_core::config::Config;
use metamp_core::ml::data::training_digest;
use metamp_core::ml::{self_train, Params, TrainedClassifier, N_CLASSES};
use metamp_core::store::{EntryStore, StoreSnapshot};
pub use metamp_core::wire::TrainingSummary;

use crate::cache::TtlCache;
use crate::error::ApiError;

/// Labeled rows needed before the service will train a classifier.
pub const MIN_TRAINING_ROWS: usize = 10;

pub struct ServedModel {
    pub classifier: TrainedClassifier,
    pub summary: TrainingSummary,
}

struct Slot {
    version: u64,
    model: Result<Arc<ServedModel>, ApiError>,
}

pub struct AppState {
    pub store: Arc<dyn EntryStore>,
    pub config: Config,
    pub cache: TtlCache,
    model: Mutex<Option<Slot>>,
}

impl AppState {
    pub fn new(store: Arc<dyn EntryStore>, config: Config) -> Self {
        AppState {
            cache: TtlCache::new(Duration::from_secs(config.cache_ttl_secs)),
            store,
            config,
            model: Mutex::new(None),
        }
    }

    /// The classifier for `snapshot`, trained on first use per store
    /// version. Blocking; call from a blocking task.
    pub fn model(&self, snapshot: &StoreSnapshot) -> Result<Arc<ServedModel>, ApiError> {
        let mut slot = self.model.lock().expect("model lock poisoned");
        if let Some(s) = slot.as_ref().filter(|s| s.version == snapshot.version) {
            return s.model.clone();
        }
        let model = train_for(snapshot, &self.config).map(Arc::new);
        if let Err(e) = &model {
            tracing::warn!("classifier unavailable at store version {}: {e:?}", snapshot.version);
        }
        *slot = Some(Slot {
            version: snapshot.version,
            model: model.clone(),
        });
        model
    }
}

/// Trains the served classifier: the configured model kind on entries with
/// a target MPstruc group, self-trained over the unlabeled remainder when
/// there is one.
pub fn train_for(snapshot: &StoreSnapshot, config: &Config) -> Result<ServedModel, ApiError> {
    let ds = metamp_core::ml::prepare_dataset(&snapshot.entries, &config.outliers);
    let mut class_counts = [0usize; N_CLASSES];
    for r in ds.labeled() {
        class_counts[r.label.expect("labeled row")] += 1;
    }
    let labeled: usize = class_counts.iter().sum();
    if labeled < MIN_TRAINING_ROWS {
        return Err(ApiError::InsufficientData(format!(
            "{labeled} labeled entries with complete OPM features, need {MIN_TRAINING_ROWS}"
        )));
    }
    if let Some(c) = class_counts.iter().position(|&n| n == 0) {
        return Err(ApiError::InsufficientData(format!("no labeled entries for class {c}")));
    }
    let encoder = ds.fit_encoder()?;
    let train = ds.labeled_matrix(&encoder)?;
    let pool = ds.unlabeled_matrix(&encoder)?;
    let params = Params {
        n_trees: config.n_trees,
        ..Params::default()
    };
    let mut warnings = ds.warnings.clone();
    warnings.extend(train.warnings.iter().cloned());
    let (classifier, pseudo) = if pool.x.is_empty() {
        (TrainedClassifier::fit(config.model, encoder, &train.x, &train.y, &params, config.seed)?, 0)
    } else {
        let st = self_train(
            config.model,
            &train.x,
            &train.y,
            &pool.x,
            &params,
            &config.self_training,
            config.seed,
        )?;
        let classifier = TrainedClassifier {
            model: st.model,
            encoder,
            training_digest: training_digest(&train.x, &train.y),
        };
        (classifier, st.pseudo_labels.len())
    };
    Ok(ServedModel {
        classifier,
        summary: TrainingSummary {
            store_version: snapshot.version,
            labeled,
            unlabeled: pool.x.len(),
            pseudo_labeled: pseudo,
            excluded: ds.excluded.len(),
            class_counts,
            warnings,
        },
    })
}
