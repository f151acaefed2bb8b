//! Gauss-Legendre rules on the reference interval `[0, 1]`.

/// Points and weights on `[0, 1]`; weights sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussRule {
    pub points: &'static [f64],
    pub weights: &'static [f64],
}

const SQRT3_INV_HALF: f64 = 0.288_675_134_594_812_9; // 1 / (2 sqrt 3)
const SQRT15_TENTH_HALF: f64 = 0.387_298_334_620_741_7; // sqrt(3/5) / 2

static TWO_POINTS: [f64; 2] = [0.5 - SQRT3_INV_HALF, 0.5 + SQRT3_INV_HALF];
static TWO_WEIGHTS: [f64; 2] = [0.5, 0.5];
static THREE_POINTS: [f64; 3] = [0.5 - SQRT15_TENTH_HALF, 0.5, 0.5 + SQRT15_TENTH_HALF];
static THREE_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

impl GaussRule {
    pub const fn two_point() -> Self {
        Self {
            points: &TWO_POINTS,
            weights: &TWO_WEIGHTS,
        }
    }

    pub const fn three_point() -> Self {
        Self {
            points: &THREE_POINTS,
            weights: &THREE_WEIGHTS,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(xi, w)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: GaussRule, f: impl Fn(f64) -> f64) -> f64 {
        rule.iter().map(|(x, w)| w * f(x)).sum()
    }

    #[test]
    fn exactness_degrees() {
        for k in 0..=3 {
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((integrate(GaussRule::two_point(), |x| x.powi(k)) - exact).abs() < 1e-15);
        }
        for k in 0..=5 {
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((integrate(GaussRule::three_point(), |x| x.powi(k)) - exact).abs() < 1e-15);
        }
        assert!((integrate(GaussRule::two_point(), |x| x.powi(4)) - 0.2).abs() > 1e-4);
    }
}
