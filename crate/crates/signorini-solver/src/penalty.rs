/// The penalty profile `beta_eps`.
///
/// `beta = 0` for `s >= 0` and `beta = eps + s/eps` for `s <= -2 eps^2`.
/// In between, with `x = (s + 2 eps^2) / (2 eps^2)`,
/// `beta = eps (-1 + 2x - 2x^3 + x^4)`, which matches value, slope and
/// curvature of both outer pieces and has `beta' = (1-x)^2 (1+2x) / eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    epsilon: f64,
}

impl Penalty {
    pub fn new(epsilon: f64) -> Option<Self> {
        (epsilon > 0.0 && epsilon.is_finite()).then_some(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn knot(&self) -> f64 {
        -2.0 * self.epsilon * self.epsilon
    }

    pub fn beta(&self, s: f64) -> f64 {
        let e = self.epsilon;
        if s >= 0.0 {
            0.0
        } else if s <= self.knot() {
            e + s / e
        } else {
            let x = (s - self.knot()) / (2.0 * e * e);
            e * (-1.0 + x * (2.0 + x * x * (-2.0 + x)))
        }
    }

    pub fn beta_prime(&self, s: f64) -> f64 {
        let e = self.epsilon;
        if s >= 0.0 {
            0.0
        } else if s <= self.knot() {
            1.0 / e
        } else {
            let x = (s - self.knot()) / (2.0 * e * e);
            (1.0 - x).powi(2) * (1.0 + 2.0 * x) / e
        }
    }

    /// The root of `a x + q beta(x) = rhs` for `a > 0`, `q >= 0`; the left
    /// side is strictly increasing in `x`.
    pub fn solve_scalar(&self, a: f64, q: f64, rhs: f64) -> f64 {
        if rhs >= 0.0 {
            return rhs / a;
        }
        let e = self.epsilon;
        let linear = (rhs - q * e) / (a + q / e);
        if linear <= self.knot() {
            return linear;
        }
        // Root inside the bridge: safeguarded Newton on [knot, 0].
        let f = |x: f64| a * x + q * self.beta(x) - rhs;
        let (mut lo, mut hi) = (self.knot(), 0.0);
        let mut x = rhs / a;
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..100 {
            let fx = f(x);
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = a + q * self.beta_prime(x);
            let mut next = x - fx / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-300 {
                return next;
            }
            x = next;
        }
        x
    }
}
