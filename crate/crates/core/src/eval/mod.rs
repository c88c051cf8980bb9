//! Objective evaluation: PCA projection, Parzen-window log-likelihood,
//! sentence-level motion functionals, the linear emotion classifier, and
//! the preference statistics used for subjective comparisons.

mod functionals;
mod parzen;
mod pca;
mod stats;
mod svm;

pub use functionals::{functionals, FUNCTIONALS_PER_CHANNEL, FUNCTIONAL_DIM};
pub use parzen::{default_bandwidth_grid, fit_parzen, loglik, ParzenModel};
pub use pca::{fit_pca, PcaModel};
pub use stats::{
    auc, cronbach_alpha, hard_proportion, preference_soft, proportion_test, z_test_mean50,
    PreferenceOption, PreferenceRecord,
};
pub use svm::{class_metrics, class_metrics_all, macro_f1, train_classifier, ClassMetrics, EmotionClassifier};
