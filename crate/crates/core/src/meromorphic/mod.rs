//! Power-times-rational complex functions `z^alpha P(z) / Q(z)`: evaluation
//! on declared branches, closed-form derivatives, Schwarzian derivatives,
//! orders at points, root solving and end expansions.

mod ends;
mod ext;
mod poly;
mod power_rational;
mod roots;

pub use ends::{end_expansion, EndExpansion};
pub use ext::ExtComplex;
pub use poly::Poly;
pub use power_rational::{ChartPoint, PowerRational, SchwarzianEvaluator};
pub use roots::{poly_roots, roots, RootSet};
