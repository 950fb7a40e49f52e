//! Model data: nonlinearities `f`, potentials `V`, and weights `ξ`.

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;
use num_traits::Float;

/// `(x, u) ↦ value`, thread-safe.
pub type PointValueFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
/// `x ↦ value`, thread-safe.
pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The nonlinearity `f(x,u)` together with its antiderivative `F(x,u)`.
#[derive(Clone)]
pub enum Nonlinearity {
    /// `f = |u|^{q-2}u`, `F = |u|^q/q`; satisfies the growth, small-u, and
    /// superquadraticity conditions with `ϑ = q`.
    Power { q: f64 },
    /// User-supplied pair with declared growth exponent `q` and
    /// superquadraticity constant `theta`.
    Custom {
        label: String,
        f: PointValueFn,
        antiderivative: PointValueFn,
        q: f64,
        theta: f64,
    },
}

impl Nonlinearity {
    pub fn power(q: f64) -> Self {
        Nonlinearity::Power { q }
    }

    /// The identically zero nonlinearity (declared `q = 4`, `ϑ = 4`); it
    /// fails the strict superquadraticity check, so it can only be used
    /// through [`crate::problem::ProblemSpec::new_unchecked`].
    pub fn zero() -> Self {
        Nonlinearity::Custom {
            label: "zero".into(),
            f: Arc::new(|_, _| 0.0),
            antiderivative: Arc::new(|_, _| 0.0),
            q: 4.0,
            theta: 4.0,
        }
    }

    pub fn q(&self) -> f64 {
        match self {
            Nonlinearity::Power { q } => *q,
            Nonlinearity::Custom { q, .. } => *q,
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            Nonlinearity::Power { q } => *q,
            Nonlinearity::Custom { theta, .. } => *theta,
        }
    }

    pub fn is_autonomous(&self) -> bool {
        matches!(self, Nonlinearity::Power { .. })
    }

    pub fn f(&self, x: &[f64], u: f64) -> f64 {
        match self {
            Nonlinearity::Power { q } => signed_power(u, q - 1.0),
            Nonlinearity::Custom { f, .. } => f(x, u),
        }
    }

    #[allow(non_snake_case)]
    pub fn F(&self, x: &[f64], u: f64) -> f64 {
        match self {
            Nonlinearity::Power { q } => u.abs().powf(*q) / q,
            Nonlinearity::Custom { antiderivative, .. } => antiderivative(x, u),
        }
    }

    /// `∂f/∂u`; central differences for custom nonlinearities.
    pub fn derivative(&self, x: &[f64], u: f64) -> f64 {
        match self {
            Nonlinearity::Power { q } => (q - 1.0) * u.abs().powf(q - 2.0),
            Nonlinearity::Custom { f, .. } => {
                let h = 1e-6 * u.abs().max(1.0);
                (f(x, u + h) - f(x, u - h)) / (2.0 * h)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Nonlinearity::Power { q } => alloc::format!("power(q={q})"),
            Nonlinearity::Custom { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Power { q } => f.debug_struct("Power").field("q", q).finish(),
            Nonlinearity::Custom { label, q, theta, .. } => f
                .debug_struct("Custom")
                .field("label", label)
                .field("q", q)
                .field("theta", theta)
                .finish(),
        }
    }
}

/// Which family of conditions a potential is meant to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialClass {
    /// Positive infimum and vanishing ball integrals of `1/V`.
    Coercive,
    /// Non-negative with a finite-measure sublevel set and a zero set with interior.
    Well,
    Unspecified,
}

#[derive(Clone)]
pub enum Potential {
    /// `V(x) = 1 + |x|²`.
    CoerciveQuadratic,
    /// `V = 0` on `|x| ≤ radius`, `V = height·min(1, ((|x|-radius)/width)²)` outside.
    Well { radius: f64, height: f64, width: f64 },
    /// `V ≡ value`.
    Constant { value: f64 },
    Custom { label: String, v: PointFn, class: PotentialClass },
}

impl Potential {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        match self {
            Potential::CoerciveQuadratic => 1.0 + r2,
            Potential::Well { radius, height, width } => {
                let r = r2.sqrt();
                if r <= *radius {
                    0.0
                } else {
                    height * ((r - radius) / width).powi(2).min(1.0)
                }
            }
            Potential::Constant { value } => *value,
            Potential::Custom { v, .. } => v(x),
        }
    }

    pub fn class(&self) -> PotentialClass {
        match self {
            Potential::CoerciveQuadratic => PotentialClass::Coercive,
            Potential::Well { .. } => PotentialClass::Well,
            Potential::Constant { .. } => PotentialClass::Unspecified,
            Potential::Custom { class, .. } => *class,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Potential::CoerciveQuadratic => "coercive_quadratic".into(),
            Potential::Well { radius, height, width } => {
                alloc::format!("well(r0={radius},M={height},w={width})")
            }
            Potential::Constant { value } => alloc::format!("constant({value})"),
            Potential::Custom { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The positive weight `ξ(x)` in front of the sublinear term.
#[derive(Clone)]
pub enum Weight {
    /// `ξ(x) = e^{-|x|²}`.
    Gaussian,
    Custom { label: String, xi: PointFn },
}

impl Weight {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Gaussian => (-x.iter().map(|c| c * c).sum::<f64>()).exp(),
            Weight::Custom { xi, .. } => xi(x),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Weight::Gaussian => "gaussian".into(),
            Weight::Custom { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `sign(u)|u|^e`, zero at `u = 0`.
pub fn signed_power(u: f64, e: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(e)
    }
}
