//! Gauss-Legendre rules mapped to the unit interval.

use gauss_quad::GaussLegendre;

/// Nodes and weights on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnitRule {
    /// `n`-point rule, exact for polynomials of degree `2n − 1`. `n` is clamped to at least 2.
    pub fn gauss(n: usize) -> Self {
        let rule = GaussLegendre::new(n.max(2)).expect("degree >= 2");
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = b - a;
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(a + h * x)).sum::<f64>() * h
    }
}

/// Adaptive bisection on `[a, b]` until the 10-point rule agrees with its
/// two halves to `tol` (absolute) on every panel.
pub fn adaptive(a: f64, b: f64, tol: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let rule = UnitRule::gauss(10);
    let whole = rule.integrate(a, b, f);
    refine(&rule, a, b, whole, tol, f, 0)
}

fn refine(rule: &UnitRule, a: f64, b: f64, whole: f64, tol: f64, f: &dyn Fn(f64) -> f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    if (left + right - whole).abs() <= tol || depth >= 40 {
        return left + right;
    }
    refine(rule, a, m, left, 0.5 * tol, f, depth + 1) + refine(rule, m, b, right, 0.5 * tol, f, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let r = UnitRule::gauss(6);
        let got = r.integrate(-1.0, 2.0, |x| x.powi(11));
        let exact = (2f64.powi(12) - 1.0) / 12.0;
        assert!((got - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn nodes_sorted_inside_unit_interval() {
        let r = UnitRule::gauss(12);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes[0] > 0.0 && r.nodes[11] < 1.0);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_a_peak() {
        let got = adaptive(-1.0, 1.0, 1e-13, &|x| 1.0 / (1e-4 + x * x));
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((got - exact).abs() < 1e-10 * exact);
    }
}
