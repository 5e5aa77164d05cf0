//! Incremental regressors and the ADWIN change detector they use.

pub mod adwin;
pub mod arf;
pub mod hoeffding;
pub mod pa;
pub mod split;

pub use adwin::{Adwin, AdwinUpdate};
pub use arf::{AdaptiveRandomForestRegressor, ArfConfig, MaxFeatures};
pub use hoeffding::{
    HoeffdingAdaptiveTreeRegressor, HoeffdingTreeConfig, HoeffdingTreeRegressor, LeafPrediction,
    TreeCounters,
};
pub use pa::{PaConfig, PaStep, PaVariant, PassiveAggressiveRegressor};
pub use split::{hoeffding_bound, NumericObserver, SplitSearch, SplitSuggestion};
