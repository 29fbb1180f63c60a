use std::sync::Arc;

use serde::Serialize;

use super::certificate::{certificate, Certificate};
use super::feasible::{init_digitals, DigitalBounds, INTERIOR_MARGIN};
use crate::error::{MedError, Result};
use crate::langevin::{InverseLangevin, InverseMethod};
use crate::med::{build_density_with_digitals, MarketQuotes, PiecewiseExpDensity};
use crate::tridiag::Tridiagonal;

/// Default stopping tolerance on the entropy-gap bound.
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Trial points with `|β_i V_i|` above this are rejected by the line search.
pub const BETA_CAP: f64 = 350.0;
const MAX_HALVINGS: u32 = 60;

/// How an iterate was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Initial,
    Newton,
    Damped,
    ProjectedGradient,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Initial => "initial",
            StepKind::Newton => "newton",
            StepKind::Damped => "damped",
            StepKind::ProjectedGradient => "projected-gradient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub digitals: Vec<f64>,
    pub entropy: f64,
    pub certificate: Certificate,
    /// Line-search multiplier of the step that produced this iterate.
    pub step_length: f64,
    pub step: StepKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Number of accepted steps.
    pub fn steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone)]
pub struct BkSolution {
    pub digitals: Vec<f64>,
    pub density: PiecewiseExpDensity,
    pub certificate: Certificate,
    pub trace: IterationTrace,
}

/// Entropy of the maximum-entropy density as a function of the digitals,
/// for fixed calls.
#[derive(Debug)]
pub struct EntropyProblem<'a> {
    quotes: &'a MarketQuotes,
    inverter: &'a dyn InverseLangevin,
    bounds: DigitalBounds,
}

impl<'a> EntropyProblem<'a> {
    pub fn new(quotes: &'a MarketQuotes, inverter: &'a dyn InverseLangevin) -> Result<Self> {
        Ok(Self {
            quotes,
            inverter,
            bounds: DigitalBounds::from_quotes(quotes)?,
        })
    }

    pub fn bounds(&self) -> &DigitalBounds {
        &self.bounds
    }

    pub fn density(&self, digitals: &[f64]) -> Result<PiecewiseExpDensity> {
        self.bounds.check_open(digitals)?;
        build_density_with_digitals(self.quotes, digitals, self.inverter)
    }

    /// `H(D)`.
    pub fn entropy(&self, digitals: &[f64]) -> Result<f64> {
        Ok(self.density(digitals)?.entropy())
    }

    /// `H'(D)`: the log-jumps `ln f(K_j^-) - ln f(K_j^+)` of the density.
    pub fn gradient(&self, digitals: &[f64]) -> Result<Vec<f64>> {
        Ok(self.density(digitals)?.log_jumps())
    }

    /// `H''(D)` by central differences of the gradient.
    ///
    /// Column `j` only touches rows `j-1..=j+1`, so columns three apart are
    /// perturbed together: six gradient evaluations regardless of `n`.
    pub fn hessian(&self, digitals: &[f64]) -> Result<Tridiagonal> {
        let n = digitals.len();
        let steps: Vec<f64> = digitals
            .iter()
            .enumerate()
            .map(|(j, &d)| (1e-7 * d.abs().max(1.0)).min(0.25 * self.bounds.slack(j, d)))
            .collect();
        let mut jac = Tridiagonal::zeros(n);
        let mut probe = digitals.to_vec();
        for color in 0..3.min(n) {
            let cols: Vec<usize> = (color..n).step_by(3).collect();
            for &j in &cols {
                probe[j] = digitals[j] + steps[j];
            }
            let up = self.gradient(&probe)?;
            for &j in &cols {
                probe[j] = digitals[j] - steps[j];
            }
            let down = self.gradient(&probe)?;
            for &j in &cols {
                probe[j] = digitals[j];
                let h2 = 2.0 * steps[j];
                jac.diag[j] = (up[j] - down[j]) / h2;
                if j > 0 {
                    jac.upper[j - 1] = (up[j - 1] - down[j - 1]) / h2;
                }
                if j + 1 < n {
                    jac.lower[j] = (up[j + 1] - down[j + 1]) / h2;
                }
            }
        }
        Ok(jac)
    }
}

/// Analytic entropy gradient at `digitals` for the calls of `q`.
pub fn entropy_gradient(
    q: &MarketQuotes,
    digitals: &[f64],
    inverter: &dyn InverseLangevin,
) -> Result<Vec<f64>> {
    EntropyProblem::new(q, inverter)?.gradient(digitals)
}

/// Tridiagonal entropy Hessian at `digitals`.
pub fn entropy_hessian(
    q: &MarketQuotes,
    digitals: &[f64],
    inverter: &dyn InverseLangevin,
) -> Result<Tridiagonal> {
    EntropyProblem::new(q, inverter)?.hessian(digitals)
}

/// Maximises `H` over the feasible digitals with the default inverse method.
pub fn maximize_entropy(q: &MarketQuotes, tol: f64, max_iter: usize) -> Result<BkSolution> {
    BkSolver::new().tol(tol).max_iter(max_iter).solve(q)
}

/// Damped Newton ascent on `H` with tridiagonal solves, falling back to
/// projected gradient steps when the Hessian estimate is not negative
/// definite. Stops once the certificate's entropy-gap bound is below `tol`.
#[derive(Debug, Clone)]
pub struct BkSolver {
    inverter: Arc<dyn InverseLangevin>,
    tol: f64,
    max_iter: usize,
    margin: f64,
}

impl Default for BkSolver {
    fn default() -> Self {
        Self {
            inverter: Arc::new(InverseMethod::default()),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            margin: INTERIOR_MARGIN,
        }
    }
}

struct Iterate {
    digitals: Vec<f64>,
    density: PiecewiseExpDensity,
    entropy: f64,
    gradient: Vec<f64>,
}

impl Iterate {
    fn grad_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

impl BkSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn inverter(mut self, inverter: Arc<dyn InverseLangevin>) -> Self {
        self.inverter = inverter;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn solve(&self, q: &MarketQuotes) -> Result<BkSolution> {
        let start = init_digitals(q)?;
        self.solve_from(q, start)
    }

    /// Runs the ascent from a caller-supplied feasible starting point.
    pub fn solve_from(&self, q: &MarketQuotes, start: Vec<f64>) -> Result<BkSolution> {
        if !(self.tol > 0.0) {
            return Err(MedError::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        let problem = EntropyProblem::new(q, self.inverter.as_ref())?;
        let mut current = self.evaluate(&problem, start)?;
        let mut trace = IterationTrace::default();
        let (mut step, mut step_length) = (StepKind::Initial, 0.0);

        for _ in 0..self.max_iter.max(1) {
            let cert = certificate(&current.gradient, &current.density);
            trace.records.push(TraceRecord {
                digitals: current.digitals.clone(),
                entropy: current.entropy,
                certificate: cert.clone(),
                step_length,
                step,
            });
            if cert.entropy_gap_bound <= self.tol {
                return Ok(BkSolution {
                    digitals: current.digitals,
                    density: current.density,
                    certificate: cert,
                    trace,
                });
            }
            match self.advance(&problem, &current)? {
                Some((next, kind, alpha)) => {
                    current = next;
                    step = kind;
                    step_length = alpha;
                }
                None => {
                    return Err(MedError::NonConvergence {
                        reason: "line search found no ascent step".into(),
                        trace: Box::new(trace),
                        certificate: Some(Box::new(cert)),
                    })
                }
            }
        }
        let certificate = trace.last().map(|r| Box::new(r.certificate.clone()));
        Err(MedError::NonConvergence {
            reason: format!("iteration limit {} reached", self.max_iter),
            trace: Box::new(trace),
            certificate,
        })
    }

    fn evaluate(&self, problem: &EntropyProblem<'_>, digitals: Vec<f64>) -> Result<Iterate> {
        let density = problem.density(&digitals)?;
        let entropy = density.entropy();
        let gradient = density.log_jumps();
        Ok(Iterate {
            digitals,
            density,
            entropy,
            gradient,
        })
    }

    /// Trial point admissible for the line search: inside the shrunken box,
    /// buildable, and with every finite-bucket tilt below the cap.
    fn trial(&self, problem: &EntropyProblem<'_>, digitals: Vec<f64>) -> Option<Iterate> {
        if !problem
            .bounds()
            .contains_with_margin(&digitals, self.margin)
        {
            return None;
        }
        let it = self.evaluate(problem, digitals).ok()?;
        let grid = it.density.grid();
        let capped = grid
            .buckets()
            .zip(&it.density.params().beta)
            .filter_map(|(b, &beta)| b.half_width().map(|v| (beta * v).abs()))
            .all(|z| z <= BETA_CAP);
        (capped && it.entropy.is_finite()).then_some(it)
    }

    fn accepts(&self, current: &Iterate, trial: &Iterate) -> bool {
        if trial.entropy > current.entropy {
            return true;
        }
        // Within rounding of H, progress is judged by the gradient instead.
        let noise = 8.0 * f64::EPSILON * current.entropy.abs().max(1.0);
        trial.entropy >= current.entropy - noise && trial.grad_norm() < current.grad_norm()
    }

    fn advance(
        &self,
        problem: &EntropyProblem<'_>,
        current: &Iterate,
    ) -> Result<Option<(Iterate, StepKind, f64)>> {
        let neg_grad: Vec<f64> = current.gradient.iter().map(|g| -g).collect();
        let newton = problem
            .hessian(&current.digitals)
            .and_then(|h| h.symmetrized().solve_negative_definite(&neg_grad));
        if let Ok(direction) = newton {
            let mut alpha = 1.0;
            for _ in 0..MAX_HALVINGS {
                let point: Vec<f64> = current
                    .digitals
                    .iter()
                    .zip(&direction)
                    .map(|(d, s)| d + alpha * s)
                    .collect();
                if let Some(t) = self.trial(problem, point) {
                    if self.accepts(current, &t) {
                        let kind = if alpha == 1.0 {
                            StepKind::Newton
                        } else {
                            StepKind::Damped
                        };
                        return Ok(Some((t, kind, alpha)));
                    }
                }
                alpha *= 0.5;
            }
        }
        Ok(self.projected_gradient(problem, current))
    }

    fn projected_gradient(
        &self,
        problem: &EntropyProblem<'_>,
        current: &Iterate,
    ) -> Option<(Iterate, StepKind, f64)> {
        let bounds = problem.bounds();
        // First trial moves the most constrained coordinate half its box width.
        let scale = current
            .gradient
            .iter()
            .enumerate()
            .map(|(j, g)| g.abs() / bounds.width(j))
            .fold(0.0, f64::max);
        if !(scale > 0.0) {
            return None;
        }
        let mut alpha = 0.5 / scale;
        for _ in 0..MAX_HALVINGS {
            let mut point: Vec<f64> = current
                .digitals
                .iter()
                .zip(&current.gradient)
                .map(|(d, g)| d + alpha * g)
                .collect();
            bounds.clamp(&mut point, self.margin);
            if let Some(t) = self.trial(problem, point) {
                if self.accepts(current, &t) {
                    return Some((t, StepKind::ProjectedGradient, alpha));
                }
            }
            alpha *= 0.5;
        }
        None
    }
}
