//! Closed-form cost and error estimates for the compilation protocols.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn unit_interval(eps: f64) -> Result<f64> {
    if eps > 0.0 && eps < 1.0 {
        Ok(eps)
    } else {
        Err(invalid(format!("target error must lie in (0, 1), got {eps}")))
    }
}

/// Inputs shared by the estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub t: f64,
    /// Number of terms `L`.
    pub terms: usize,
    /// Largest coefficient magnitude `Λ`.
    pub lambda_max: f64,
    /// Coefficient one-norm `λ`.
    pub lambda_one: f64,
    pub epsilon: f64,
    /// Steps or samples `N`.
    pub steps: usize,
}

/// Up-to-constant step count for a product formula of order 1 or `2k`.
pub fn trotter_steps(t: f64, terms: usize, lambda_max: f64, epsilon: f64, order: u32) -> Result<f64> {
    let scale = positive("t", t)? * positive("L", terms as f64)? * positive("Λ", lambda_max)?;
    unit_interval(epsilon)?;
    match order {
        1 => Ok(scale * scale / epsilon),
        o if o >= 2 && o % 2 == 0 => {
            let two_k = o as f64;
            Ok(scale.powf(1.0 + 1.0 / two_k) / epsilon.powf(1.0 / two_k))
        }
        o => Err(invalid(format!("product formulas exist for order 1 or even orders, got {o}"))),
    }
}

/// qDrift sample count `2(tλ)²/ε`.
pub fn qdrift_samples(t: f64, lambda_one: f64, epsilon: f64) -> Result<f64> {
    let x = positive("t", t)? * positive("λ", lambda_one)?;
    Ok(2.0 * x * x / unit_interval(epsilon)?)
}

/// qDrift error bound `2λ²t²/N`.
pub fn qdrift_error(lambda_one: f64, t: f64, samples: usize) -> Result<f64> {
    let x = positive("λ", lambda_one)? * positive("t", t)?;
    Ok(2.0 * x * x / positive("N", samples as f64)?)
}

/// `2λ²t²/N · e^{2λt/N}`, the bound before dropping higher orders.
pub fn qdrift_error_with_prefactor(lambda_one: f64, t: f64, samples: usize) -> Result<f64> {
    let base = qdrift_error(lambda_one, t, samples)?;
    Ok(base * (2.0 * lambda_one * t / samples as f64).exp())
}

/// `(ΛtL)⁴/N³ e^{2ΛtL/N} + 2(ΛtL)³/(3N²) e^{ΛtL/N}`.
pub fn random_perm_bound(lambda_max: f64, t: f64, terms: usize, steps: usize) -> Result<f64> {
    let x = positive("Λ", lambda_max)? * positive("t", t)? * positive("L", terms as f64)?;
    let n = positive("N", steps as f64)?;
    Ok(x.powi(4) / n.powi(3) * (2.0 * x / n).exp() + 2.0 * x.powi(3) / (3.0 * n * n) * (x / n).exp())
}

/// Cost-optimal Suzuki half-order and the `5^k / ε^{1/2k}` profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrotterOrderReport {
    pub k_star: f64,
    /// `(k, 5^k ε^{-1/2k})` for `k = 1..=5`.
    pub profile: Vec<(u32, f64)>,
}

/// `k* = sqrt(ln(1/ε) / (2 ln 5))`, the stationary point of `5^k ε^{-1/2k}`.
pub fn optimal_trotter_order(epsilon: f64) -> Result<TrotterOrderReport> {
    unit_interval(epsilon)?;
    let k_star = ((1.0 / epsilon).ln() / (2.0 * 5f64.ln())).sqrt();
    let profile = (1..=5).map(|k| (k, 5f64.powi(k as i32) * epsilon.powf(-1.0 / (2.0 * k as f64)))).collect();
    Ok(TrotterOrderReport { k_star, profile })
}

/// Importance-sampled versus plain qDrift gate cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImportanceComparison {
    pub cost_importance: f64,
    pub cost_plain: f64,
    /// `E_p[1/C] · E_p[C]`, at least 1 by Jensen.
    pub jensen_product: f64,
    pub importance_cheaper: bool,
}

/// `C_qc = (tλ)²/ε · (1 + E_p[1/C]E_p[C]) / E_p[1/C]` and `C_p = 2(tλ)²/ε · E_p[C]`.
pub fn importance_cost_compare(p: &[f64], cost: &[f64], t: f64, lambda_one: f64, epsilon: f64) -> Result<ImportanceComparison> {
    if p.is_empty() || p.len() != cost.len() {
        return Err(invalid("distribution and cost vectors must be nonempty and equally long"));
    }
    if p.iter().any(|x| !(*x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(invalid("p must be a probability vector"));
    }
    for c in cost {
        positive("cost", *c)?;
    }
    let scale = (positive("t", t)? * positive("λ", lambda_one)?).powi(2) / unit_interval(epsilon)?;
    let mean_c: f64 = p.iter().zip(cost).map(|(p, c)| p * c).sum();
    let mean_inv: f64 = p.iter().zip(cost).map(|(p, c)| p / c).sum();
    let jensen_product = mean_c * mean_inv;
    let cost_importance = scale * (1.0 + jensen_product) / mean_inv;
    let cost_plain = 2.0 * scale * mean_c;
    Ok(ImportanceComparison {
        cost_importance,
        cost_plain,
        jensen_product,
        importance_cheaper: cost_importance <= cost_plain,
    })
}

/// One line of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub protocol: String,
    pub formula: String,
    pub value: f64,
    /// `inequality` for rigorous bounds, `up_to_constant` for big-O brackets.
    pub kind: &'static str,
}

/// Every estimate evaluated for one query.
pub fn bounds_table(q: &BoundQuery) -> Result<Vec<BoundRow>> {
    let row = |protocol: &str, formula: &str, value: f64, kind| BoundRow {
        protocol: protocol.into(),
        formula: formula.into(),
        value,
        kind,
    };
    let mut rows = vec![
        row("trotter1", "steps (tLΛ)^2/ε", trotter_steps(q.t, q.terms, q.lambda_max, q.epsilon, 1)?, "up_to_constant"),
    ];
    for order in [2u32, 4, 6] {
        rows.push(row(
            &format!("suzuki{order}"),
            &format!("steps (tLΛ)^(1+1/{order})/ε^(1/{order})"),
            trotter_steps(q.t, q.terms, q.lambda_max, q.epsilon, order)?,
            "up_to_constant",
        ));
    }
    rows.push(row("qdrift", "samples 2(tλ)^2/ε", qdrift_samples(q.t, q.lambda_one, q.epsilon)?, "up_to_constant"));
    rows.push(row("qdrift", "error 2λ^2t^2/N", qdrift_error(q.lambda_one, q.t, q.steps)?, "inequality"));
    rows.push(row(
        "qdrift",
        "error 2λ^2t^2/N·exp(2λt/N)",
        qdrift_error_with_prefactor(q.lambda_one, q.t, q.steps)?,
        "inequality",
    ));
    rows.push(row(
        "random_permutation",
        "(ΛtL)^4/N^3·exp(2ΛtL/N)+2(ΛtL)^3/(3N^2)·exp(ΛtL/N)",
        random_perm_bound(q.lambda_max, q.t, q.terms, q.steps)?,
        "inequality",
    ));
    rows.push(row("suzuki", "optimal k*", optimal_trotter_order(q.epsilon)?.k_star, "up_to_constant"));
    Ok(rows)
}
