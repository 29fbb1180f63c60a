//! Interchangeable inverse-Langevin strategies and a name-keyed registry.
//!
//! Every strategy implements [`InverseLangevin`]; the calibration code only
//! ever sees `&dyn InverseLangevin`, so the method is picked at runtime from
//! configuration or the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{
    inv_bergstrom, inv_exact, inv_pade, inv_polished, inv_rounded_pade, inv_taylor,
    DEFAULT_POLISH_STEPS, DEFAULT_TAYLOR_ORDER,
};
use crate::error::{MedError, Result};

/// A method for solving `L(x) = y`.
pub trait InverseLangevin: fmt::Debug + Send + Sync {
    /// Registry key, also used in exports.
    fn name(&self) -> &'static str;

    fn invert(&self, y: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorSeries {
    order: u32,
}

impl TaylorSeries {
    pub fn new(order: u32) -> Result<Self> {
        if matches!(order, 1 | 3 | 5 | 7) {
            Ok(Self { order })
        } else {
            Err(MedError::InvalidArgument(format!(
                "Taylor order must be 1, 3, 5 or 7, got {order}"
            )))
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

impl Default for TaylorSeries {
    fn default() -> Self {
        Self {
            order: DEFAULT_TAYLOR_ORDER,
        }
    }
}

impl InverseLangevin for TaylorSeries {
    fn name(&self) -> &'static str {
        "taylor"
    }
    fn invert(&self, y: f64) -> Result<f64> {
        inv_taylor(y, self.order)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Pade;

impl InverseLangevin for Pade {
    fn name(&self) -> &'static str {
        "pade"
    }
    fn invert(&self, y: f64) -> Result<f64> {
        inv_pade(y)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RoundedPade;

impl InverseLangevin for RoundedPade {
    fn name(&self) -> &'static str {
        "rounded-pade"
    }
    fn invert(&self, y: f64) -> Result<f64> {
        inv_rounded_pade(y)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bergstrom;

impl InverseLangevin for Bergstrom {
    fn name(&self) -> &'static str {
        "bergstrom"
    }
    fn invert(&self, y: f64) -> Result<f64> {
        inv_bergstrom(y)
    }
}

/// Safeguarded Newton solve to a residual tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactInverse {
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for ExactInverse {
    fn default() -> Self {
        Self {
            tol: 1e-15,
            max_iter: 100,
        }
    }
}

impl InverseLangevin for ExactInverse {
    fn name(&self) -> &'static str {
        "exact"
    }
    fn invert(&self, y: f64) -> Result<f64> {
        inv_exact(y, self.tol, self.max_iter)
    }
}

/// Bergström seed refined by a fixed number of Newton steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolishedBergstrom {
    pub steps: u32,
}

impl Default for PolishedBergstrom {
    fn default() -> Self {
        Self {
            steps: DEFAULT_POLISH_STEPS,
        }
    }
}

impl InverseLangevin for PolishedBergstrom {
    fn name(&self) -> &'static str {
        "polished"
    }
    fn invert(&self, y: f64) -> Result<f64> {
        inv_polished(y, self.steps)
    }
}

/// Value-level description of an inverse method, convenient for configs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseMethod {
    Taylor { order: u32 },
    Pade,
    RoundedPade,
    Bergstrom,
    Exact { tol: f64, max_iter: u32 },
    Polished { steps: u32 },
}

impl Default for InverseMethod {
    fn default() -> Self {
        InverseMethod::Polished {
            steps: DEFAULT_POLISH_STEPS,
        }
    }
}

impl InverseMethod {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InverseMethod::Taylor { order } => TaylorSeries::new(order).map(|_| ()),
            InverseMethod::Exact { tol, max_iter } if !(tol > 0.0) || max_iter == 0 => {
                Err(MedError::InvalidArgument(format!(
                    "exact inverse needs tol > 0 and max_iter >= 1 (got {tol}, {max_iter})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn into_strategy(self) -> Result<Arc<dyn InverseLangevin>> {
        self.validate()?;
        Ok(match self {
            InverseMethod::Taylor { order } => Arc::new(TaylorSeries { order }),
            InverseMethod::Pade => Arc::new(Pade),
            InverseMethod::RoundedPade => Arc::new(RoundedPade),
            InverseMethod::Bergstrom => Arc::new(Bergstrom),
            InverseMethod::Exact { tol, max_iter } => Arc::new(ExactInverse { tol, max_iter }),
            InverseMethod::Polished { steps } => Arc::new(PolishedBergstrom { steps }),
        })
    }
}

impl InverseLangevin for InverseMethod {
    fn name(&self) -> &'static str {
        match self {
            InverseMethod::Taylor { .. } => "taylor",
            InverseMethod::Pade => "pade",
            InverseMethod::RoundedPade => "rounded-pade",
            InverseMethod::Bergstrom => "bergstrom",
            InverseMethod::Exact { .. } => "exact",
            InverseMethod::Polished { .. } => "polished",
        }
    }

    fn invert(&self, y: f64) -> Result<f64> {
        match *self {
            InverseMethod::Taylor { order } => inv_taylor(y, order),
            InverseMethod::Pade => inv_pade(y),
            InverseMethod::RoundedPade => inv_rounded_pade(y),
            InverseMethod::Bergstrom => inv_bergstrom(y),
            InverseMethod::Exact { tol, max_iter } => inv_exact(y, tol, max_iter),
            InverseMethod::Polished { steps } => inv_polished(y, steps),
        }
    }
}

/// Strategies keyed by [`InverseLangevin::name`].
#[derive(Debug, Clone, Default)]
pub struct InverterRegistry {
    entries: BTreeMap<&'static str, Arc<dyn InverseLangevin>>,
}

impl InverterRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// All built-in strategies with their default parameters.
    pub fn standard() -> Self {
        let mut r = Self::new();
        r.register(TaylorSeries::default());
        r.register(Pade);
        r.register(RoundedPade);
        r.register(Bergstrom);
        r.register(ExactInverse::default());
        r.register(PolishedBergstrom::default());
        r
    }

    /// Adds `strategy`, replacing any entry with the same name.
    pub fn register<S: InverseLangevin + 'static>(&mut self, strategy: S) {
        self.entries.insert(strategy.name(), Arc::new(strategy));
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn InverseLangevin>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// Strategies in name order.
    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn InverseLangevin>> {
        self.entries.values()
    }
}
