//! Small one-dimensional search and quadrature helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizer of a unimodal `f` on `[a, b]`, to within `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    golden_section_max(|x| -f(x), a, b, tol)
}

/// Root of `g` on `[lo, hi]` by bisection; `g(lo)` and `g(hi)` must differ in sign.
///
/// Stops once `|g(mid)| < ftol` or the bracket collapses to adjacent floats.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, ftol: f64) -> f64 {
    let mut g_lo = g(lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let g_mid = g(mid);
        if g_mid.abs() < ftol {
            return mid;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
}

/// Eight-point Gauss–Legendre nodes and weights on `[-1, 1]`.
#[allow(clippy::excessive_precision)]
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// `∫_a^b f` with eight-point Gauss–Legendre on `panels` equal sub-intervals.
pub fn integrate<T>(f: impl Fn(f64) -> T, a: f64, b: f64, panels: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let h = (b - a) / panels as f64;
    let mut acc = T::default();
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        for &(node, weight) in &GL8 {
            acc = acc + f(mid + 0.5 * h * node) * (0.5 * h * weight);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let x = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        let y = golden_section_min(|x| (x + 0.7).powi(2), -3.0, 1.0, 1e-10);
        assert!((y + 0.7).abs() < 1e-9);
    }

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn quadrature_is_exact_for_smooth_functions() {
        let v: f64 = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 4);
        assert!((v - 2.0).abs() < 1e-12);
        let g: f64 = integrate(|x| (-x * x).exp(), -8.0, 8.0, 32);
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
