//! Linear models, discriminant analysis and a linear SVM.

pub mod ancova;
pub mod lda;
pub mod linalg;
pub mod ols;
pub mod special;
pub mod stepwise;
pub mod svm;

pub use ancova::{ancova_feature, benjamini_hochberg, mancova, AncovaResult, Covariate, MancovaResult};
pub use lda::{fit_lda, DiscriminantResult, LdaOptions, Priors};
pub use linalg::Matrix;
pub use ols::{fit_ols, DesignMatrix, OlsFit};
pub use special::{beta_inc, chi2_sf, f_cdf, f_sf, ln_gamma};
pub use stepwise::{stepwise_lda, StepAction, StepEvent, StepwiseOptions, StepwiseTrace};
pub use svm::{train_linear_svm, LinearSvmModel, SvmOptions};
