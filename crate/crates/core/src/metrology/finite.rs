//! Central differences with a step-halving check.

use crate::error::{Error, Result};

pub fn central_difference<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(Error::Domain("step must be positive".into()));
    }
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

/// Central differences at h and h/2 and their Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Richardson {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

impl Richardson {
    /// Relative gap between the two step sizes.
    pub fn relative_gap(&self) -> f64 {
        ((self.coarse - self.fine) / self.fine).abs()
    }
}

pub fn richardson<F>(f: F, x: f64, h: f64) -> Result<Richardson>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = central_difference(&f, x, h)?;
    let fine = central_difference(&f, x, h / 2.0)?;
    Ok(Richardson {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivative() {
        let r = richardson(|x| Ok(x.powi(3)), 2.0, 1e-2).unwrap();
        assert!((r.extrapolated - 12.0).abs() < 1e-10);
        assert!(r.relative_gap() < 1e-4);
        assert!(central_difference(Ok, 0.0, 0.0).is_err());
    }
}
