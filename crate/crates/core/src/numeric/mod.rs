//! Numerical building blocks: distribution functions, quadrature and
//! optimizers shared by the marginal and copula estimators.

pub mod optim;
pub mod quad;
pub mod special;
