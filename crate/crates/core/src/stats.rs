//! Correlation statistics and the Box-Cox transform.

use crate::error::{Error, Result};

fn check_paired(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 points; got {}",
            x.len()
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite value".into()));
    }
    Ok(())
}

/// Sample Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::DegenerateInput(
            "zero variance in at least one argument".into(),
        ));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// Average ranks (1-based); ties receive the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the mean rank
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &index in &order[i..=j] {
            ranks[index] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average-ranked data.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Box-Cox power transform: (v^lambda - 1)/lambda, or ln v at lambda = 0.
///
/// Values must be strictly positive; shift them first if needed (the batch
/// harness exposes a shift-epsilon option and records the shift it applied).
pub fn box_cox(values: &[f64], lambda: f64) -> Result<Vec<f64>> {
    for (index, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue { index, value: v });
        }
    }
    Ok(values
        .iter()
        .map(|&v| {
            if lambda == 0.0 {
                v.ln()
            } else {
                (v.powf(lambda) - 1.0) / lambda
            }
        })
        .collect())
}
