use nalgebra::DVector;

/// How a log integrated likelihood was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Ala,
    AlaCurvAdj,
    AlaRefined(u32),
    La,
    ExactGaussian,
    Quadrature,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Ala => "ala".into(),
            Method::AlaCurvAdj => "ala-curvadj".into(),
            Method::AlaRefined(k) => format!("ala-refined({k})"),
            Method::La => "la".into(),
            Method::ExactGaussian => "exact-gaussian".into(),
            Method::Quadrature => "quadrature".into(),
        }
    }
}

/// Which function is expanded to second order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExpansionVariant {
    /// Log-likelihood only; prior evaluated at the Newton point `η̃`.
    #[default]
    Likelihood,
    /// Log-likelihood plus the log of the Normal (kernel) prior.
    LogJoint,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub jittered: bool,
    pub rho_hat: Option<f64>,
    pub phi0: Option<f64>,
}

/// Log integrated likelihood of one model.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalScore {
    pub log_ml: f64,
    pub method: Method,
    /// Expansion point `η₀` (the mode for LA).
    pub expansion: DVector<f64>,
    /// `η̃` for ALA, `η̂` for LA.
    pub mode: DVector<f64>,
    pub diagnostics: Diagnostics,
}
