pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `t x + y`.
pub(crate) fn axpy(t: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| t * a + b).collect()
}

pub(crate) fn check_dim(expected: usize, v: &[f64]) -> crate::Result<()> {
    if v.len() != expected {
        return Err(crate::Error::DimensionMismatch { expected, found: v.len() });
    }
    Ok(())
}
