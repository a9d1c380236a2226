//! Inner kernel of the banded generator: `out = -i M ψ` on interleaved cells.
//!
//! A cell holds `[g.re, g.im, e.re, e.im]` at one photon number. The
//! off-diagonal weight of window slot `j` at photon number `n` is
//! `factor[j] * value[n][j]`, lane by lane; the diagonal of the ground and
//! excited row enters through `diagonal[n]`. On x86-64 with AVX2 and FMA the
//! `f64` kernel holds one cell per 256-bit register.

use crate::scalar::Real;

pub(crate) const BANDS: usize = 5;
const HALF_BAND: usize = BANDS / 2;

pub(crate) type Cell<T> = [T; 4];

/// Window weights for the ground row (slots `0..5`) and excited row
/// (slots `5..10`) at one photon number. Lanes 0-1 weight the ground
/// amplitude, lanes 2-3 the excited one.
pub(crate) type CellWeights<T> = [Cell<T>; 2 * BANDS];

pub(crate) fn apply_generic<T: Real>(
    factor: &CellWeights<T>,
    value: &[CellWeights<T>],
    diagonal: &[[Cell<T>; 2]],
    psi: &[Cell<T>],
    out: &mut [Cell<T>],
) {
    let m = value.len();
    assert!(diagonal.len() == m && psi.len() == m + 2 * HALF_BAND && out.len() == psi.len());
    for (n, ((o, v), d)) in out[HALF_BAND..HALF_BAND + m].iter_mut().zip(value).zip(diagonal).enumerate() {
        let x: &[Cell<T>; BANDS] = psi[n..n + BANDS].try_into().unwrap();
        let mut g: Cell<T> = std::array::from_fn(|l| x[HALF_BAND][l] * d[0][l]);
        let mut e: Cell<T> = std::array::from_fn(|l| x[HALF_BAND][l] * d[1][l]);
        for j in 0..BANDS {
            for l in 0..4 {
                g[l] = g[l] + x[j][l] * (factor[j][l] * v[j][l]);
                e[l] = e[l] + x[j][l] * (factor[BANDS + j][l] * v[BANDS + j][l]);
            }
        }
        *o = [g[1] + g[3], -(g[0] + g[2]), e[1] + e[3], -(e[0] + e[2])];
    }
}

pub(crate) fn apply_f64(
    factor: &CellWeights<f64>,
    value: &[CellWeights<f64>],
    diagonal: &[[Cell<f64>; 2]],
    psi: &[Cell<f64>],
    out: &mut [Cell<f64>],
) {
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
        let m = value.len();
        assert!(diagonal.len() == m && psi.len() == m + 2 * HALF_BAND && out.len() == psi.len());
        // SAFETY: the features were detected above.
        unsafe { x86::apply_fma(factor, value, diagonal, psi, out) };
        return;
    }
    apply_generic(factor, value, diagonal, psi, out)
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use std::arch::x86_64::*;
    use std::mem::transmute;

    use super::{Cell, CellWeights, BANDS, HALF_BAND};

    /// # Safety
    /// Requires AVX2 and FMA.
    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn apply_fma(
        factor: &CellWeights<f64>,
        value: &[CellWeights<f64>],
        diagonal: &[[Cell<f64>; 2]],
        psi: &[Cell<f64>],
        out: &mut [Cell<f64>],
    ) {
        let lanes = |c: Cell<f64>| transmute::<Cell<f64>, __m256d>(c);
        let sign = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
        let out = &mut out[HALF_BAND..];
        for (n, ((v, d), o)) in value.iter().zip(diagonal).zip(out).enumerate() {
            let x: &[Cell<f64>; BANDS] = psi[n..n + BANDS].try_into().unwrap();
            let mut g = _mm256_mul_pd(lanes(x[HALF_BAND]), lanes(d[0]));
            let mut e = _mm256_mul_pd(lanes(x[HALF_BAND]), lanes(d[1]));
            for j in 0..BANDS {
                let xj = lanes(x[j]);
                let wg = _mm256_mul_pd(lanes(factor[j]), lanes(v[j]));
                let we = _mm256_mul_pd(lanes(factor[BANDS + j]), lanes(v[BANDS + j]));
                g = _mm256_fmadd_pd(xj, wg, g);
                e = _mm256_fmadd_pd(xj, we, e);
            }
            let gs = _mm_add_pd(_mm256_castpd256_pd128(g), _mm256_extractf128_pd::<1>(g));
            let es = _mm_add_pd(_mm256_castpd256_pd128(e), _mm256_extractf128_pd::<1>(e));
            let r = _mm256_permute_pd::<0b0101>(_mm256_set_m128d(es, gs));
            *o = transmute::<__m256d, Cell<f64>>(_mm256_xor_pd(r, sign));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn f64_kernel_matches_generic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut cell = || std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        for m in [2, 9, 17] {
            let factor: CellWeights<f64> = std::array::from_fn(|_| cell());
            let value: Vec<CellWeights<f64>> = (0..m).map(|_| std::array::from_fn(|_| cell())).collect();
            let diagonal: Vec<[Cell<f64>; 2]> = (0..m).map(|_| [cell(), cell()]).collect();
            let mut psi: Vec<Cell<f64>> = (0..m + 4).map(|_| cell()).collect();
            for pad in [0, 1, m + 2, m + 3] {
                psi[pad] = [0.0; 4];
            }
            let mut a = vec![[7.0; 4]; m + 4];
            let mut b = a.clone();
            apply_generic(&factor, &value, &diagonal, &psi, &mut a);
            apply_f64(&factor, &value, &diagonal, &psi, &mut b);
            for (x, y) in a.as_flattened().iter().zip(b.as_flattened()) {
                assert!((x - y).abs() < 1e-13, "m {m}: {x} vs {y}");
            }
            assert_eq!(a[..2], [[7.0; 4]; 2]);
        }
    }
}
