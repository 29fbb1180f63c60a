//! Flat-file exports. All output is built in memory with fixed formatting
//! and row order, so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::bk::{Certificate, IterationTrace};
use crate::langevin::{langevin_prime_unchecked, langevin_unchecked, InverseLangevin};
use crate::med::{MarketQuotes, PiecewiseExpDensity};

/// Parameter blocks: 17 significant digits.
pub fn fmt_param(x: f64) -> String {
    format!("{x:.16e}")
}

/// Plot tables: 9 significant digits.
pub fn fmt_plot(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn params_csv(d: &PiecewiseExpDensity) -> String {
    let mut out = String::from("bucket,lower,upper,p,beta,kbar,c\n");
    let params = d.params();
    for (i, b) in d.grid().buckets().enumerate() {
        let upper = b.upper.map_or_else(|| "inf".to_string(), fmt_param);
        let _ = writeln!(
            out,
            "{i},{},{upper},{},{},{},{}",
            fmt_param(b.lower),
            fmt_param(params.p[i]),
            fmt_param(params.beta[i]),
            fmt_param(params.kbar[i]),
            fmt_param(d.log_partitions()[i]),
        );
    }
    out
}

/// `samples` equally spaced points on `[0, 1.5 K_n]`.
pub fn density_csv(d: &PiecewiseExpDensity, samples: usize) -> String {
    let top = 1.5 * d.grid().strike(d.n());
    let mut out = String::from("x,f\n");
    for k in 0..samples {
        let x = if samples == 1 {
            0.0
        } else {
            top * k as f64 / (samples - 1) as f64
        };
        let _ = writeln!(out, "{},{}", fmt_plot(x), fmt_plot(d.pdf(x)));
    }
    out
}

/// Largest relative repricing error, floored at an absolute scale of one
/// for quotes near zero.
pub fn max_reprice_error(q: &MarketQuotes, d: &PiecewiseExpDensity) -> f64 {
    reprice_rows(q, d)
        .iter()
        .map(|r| (r.3 - r.2).abs() / r.2.abs().max(1e-300))
        .fold(0.0, f64::max)
}

fn reprice_rows(q: &MarketQuotes, d: &PiecewiseExpDensity) -> Vec<(&'static str, f64, f64, f64)> {
    let mut rows = vec![("forward", 0.0, q.forward(), d.forward())];
    let strikes = q.grid().strikes();
    for (k, (&c, m)) in strikes.iter().zip(q.calls().iter().zip(d.calls())) {
        rows.push(("call", *k, c, m));
    }
    if let Some(digitals) = q.digitals() {
        for (k, (&c, m)) in strikes.iter().zip(digitals.iter().zip(d.digitals())) {
            rows.push(("digital", *k, c, m));
        }
    }
    rows
}

pub fn repricing_csv(q: &MarketQuotes, d: &PiecewiseExpDensity) -> String {
    let mut out = String::from("kind,strike,quote,model,abs_err,rel_err\n");
    for (kind, k, quote, model) in reprice_rows(q, d) {
        let abs = (model - quote).abs();
        let _ = writeln!(
            out,
            "{kind},{},{},{},{},{}",
            fmt_param(k),
            fmt_param(quote),
            fmt_param(model),
            fmt_param(abs),
            fmt_param(abs / quote.abs().max(1e-300)),
        );
    }
    out
}

/// Solved digitals with the density's log-jump and jump ratio at each strike.
pub fn digitals_csv(d: &PiecewiseExpDensity, digitals: &[f64]) -> String {
    let mut out = String::from("index,strike,digital,log_jump,jump_ratio\n");
    for (j, (g, &dj)) in d.log_jumps().iter().zip(digitals).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            j + 1,
            fmt_param(d.grid().strike(j + 1)),
            fmt_param(dj),
            fmt_param(*g),
            fmt_param(g.exp()),
        );
    }
    out
}

pub fn trace_csv(trace: &IterationTrace) -> String {
    let n = trace.records.first().map_or(0, |r| r.digitals.len());
    let mut out = String::from(
        "iter,step,step_length,entropy,grad_norm,m1,m2,m_used,entropy_gap_bound,digital_dist_bound,l1_bound",
    );
    for j in 1..=n {
        let _ = write!(out, ",d{j}");
    }
    out.push('\n');
    for (k, r) in trace.records.iter().enumerate() {
        let c = &r.certificate;
        let _ = write!(
            out,
            "{k},{},{},{},{},{},{},{},{},{},{}",
            r.step.as_str(),
            fmt_param(r.step_length),
            fmt_param(r.entropy),
            fmt_param(c.grad_norm),
            fmt_param(c.m1),
            fmt_param(c.m2),
            fmt_param(c.m_used),
            fmt_param(c.entropy_gap_bound),
            fmt_param(c.digital_dist_bound),
            fmt_param(c.l1_bound),
        );
        for d in &r.digitals {
            let _ = write!(out, ",{}", fmt_param(*d));
        }
        out.push('\n');
    }
    out
}

/// `key,value` rows in the given order.
pub fn summary_csv(rows: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

pub fn certificate_rows(c: &Certificate) -> Vec<(&'static str, String)> {
    vec![
        ("grad_norm", fmt_param(c.grad_norm)),
        ("m1", fmt_param(c.m1)),
        ("m2", fmt_param(c.m2)),
        ("m_used", fmt_param(c.m_used)),
        ("entropy_gap_bound", fmt_param(c.entropy_gap_bound)),
        ("digital_dist_bound", fmt_param(c.digital_dist_bound)),
        ("l1_bound", fmt_param(c.l1_bound)),
    ]
}

pub fn density_rows(q: &MarketQuotes, d: &PiecewiseExpDensity) -> Vec<(&'static str, String)> {
    vec![
        ("n", d.n().to_string()),
        ("entropy", fmt_param(d.entropy())),
        ("total_mass", fmt_param(d.total_mass())),
        ("max_rel_reprice_error", fmt_param(max_reprice_error(q, d))),
    ]
}

/// `points` equally spaced values on `[from, to]`.
pub fn linspace(from: f64, to: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |k| {
        if points == 1 {
            from
        } else if k + 1 == points {
            to
        } else {
            from + (to - from) * k as f64 / (points - 1) as f64
        }
    })
}

/// Columns `x, L, L'`.
pub fn langevin_table(from: f64, to: f64, points: usize) -> String {
    let mut out = String::from("x,L,dL\n");
    for x in linspace(from, to, points) {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_plot(x),
            fmt_plot(langevin_unchecked(x)),
            fmt_plot(langevin_prime_unchecked(x)),
        );
    }
    out
}

/// Columns `y`, each method's inverse, then each method's relative error
/// against `reference`. A method failing at `y` leaves `nan`.
pub fn inverse_table(
    from: f64,
    to: f64,
    points: usize,
    reference: &dyn InverseLangevin,
    methods: &[&dyn InverseLangevin],
) -> String {
    let mut out = format!("y,{}", reference.name());
    for m in methods {
        let _ = write!(out, ",{}", m.name());
    }
    for m in methods {
        let _ = write!(out, ",rel_err_{}", m.name());
    }
    out.push('\n');
    for y in linspace(from, to, points) {
        let exact = reference.invert(y).unwrap_or(f64::NAN);
        let values: Vec<f64> = methods
            .iter()
            .map(|m| m.invert(y).unwrap_or(f64::NAN))
            .collect();
        let _ = write!(out, "{},{}", fmt_plot(y), fmt_plot(exact));
        for v in &values {
            let _ = write!(out, ",{}", fmt_plot(*v));
        }
        for v in &values {
            let err = if exact == 0.0 {
                (v - exact).abs()
            } else {
                ((v - exact) / exact).abs()
            };
            let _ = write!(out, ",{}", fmt_plot(err));
        }
        out.push('\n');
    }
    out
}

pub fn write_files(dir: &Path, files: &[(&str, String)]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}
