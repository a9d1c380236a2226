//! Truncated qubit ⊗ Fock space and the instantaneous circuit Hamiltonian
//!
//! `H/h = f_r (a†a + ½) + (f_0/2) σz + g_xx σx X + g_zz σz X² + g_zx σz X + g_xz σx X²`
//!
//! with `X = a† + a`. Basis index of `|q, n⟩` is `q·(n_max+1) + n`, `q = 0`
//! for the ground state `g` and `q = 1` for the excited state `e`; `σz|e⟩ = +|e⟩`.

use num_complex::Complex;
use num_traits::Zero;

pub(crate) use crate::band::{Cell, CellWeights};
use crate::band::BANDS;
use crate::circuit::InstantParams;
use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, StateVector};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Ground = 0,
    Excited = 1,
}

impl Qubit {
    pub fn label(self) -> char {
        match self {
            Qubit::Ground => 'g',
            Qubit::Excited => 'e',
        }
    }
}

/// Operators of the truncated space, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct HilbertSpace<T> {
    n_max: usize,
    pub a: OperatorMatrix<T>,
    pub a_dag: OperatorMatrix<T>,
    pub num: OperatorMatrix<T>,
    pub sigma_x: OperatorMatrix<T>,
    pub sigma_z: OperatorMatrix<T>,
    pub sigma_plus: OperatorMatrix<T>,
    pub sigma_minus: OperatorMatrix<T>,
    /// `a† + a`
    pub x: OperatorMatrix<T>,
    /// `(a† + a)²`, the product of the truncated matrices.
    pub x2: OperatorMatrix<T>,
    pub identity: OperatorMatrix<T>,
}

fn fock_ops<T: Real>(n_max: usize) -> (OperatorMatrix<T>, OperatorMatrix<T>) {
    let m = n_max + 1;
    let mut a = OperatorMatrix::zeros(m);
    for n in 1..m {
        a[(n - 1, n)] = Complex::new(T::from_usize(n).unwrap().sqrt(), T::zero());
    }
    let a = a.with_hermitian_flag(false);
    let a_dag = a.adjoint();
    (a, a_dag)
}

impl<T: Real> HilbertSpace<T> {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Truncation(n_max));
        }
        let m = n_max + 1;
        let (fa, fa_dag) = fock_ops::<T>(n_max);
        let fid = OperatorMatrix::identity(m);
        let fx = (&fa + &fa_dag).with_hermitian_flag(true);
        let fx2 = fx.matmul(&fx).with_hermitian_flag(true);
        let fnum = fa_dag.matmul(&fa).with_hermitian_flag(true);

        let qid = OperatorMatrix::<T>::identity(2);
        let sx = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).with_hermitian_flag(true);
        let sz = OperatorMatrix::diagonal(&[-T::one(), T::one()]);
        let sp = OperatorMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let sm = sp.adjoint();

        Ok(Self {
            n_max,
            a: qid.kron(&fa),
            a_dag: qid.kron(&fa_dag),
            num: qid.kron(&fnum),
            sigma_x: sx.kron(&fid),
            sigma_z: sz.kron(&fid),
            sigma_plus: sp.kron(&fid),
            sigma_minus: sm.kron(&fid),
            x: qid.kron(&fx),
            x2: qid.kron(&fx2),
            identity: OperatorMatrix::identity(2 * m),
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn index(&self, q: Qubit, n: usize) -> usize {
        assert!(n <= self.n_max, "photon number {n} above truncation {}", self.n_max);
        q as usize * (self.n_max + 1) + n
    }

    pub fn state_of(&self, index: usize) -> (Qubit, usize) {
        let m = self.n_max + 1;
        let q = if index / m == 0 { Qubit::Ground } else { Qubit::Excited };
        (q, index % m)
    }

    pub fn label(&self, index: usize) -> String {
        let (q, n) = self.state_of(index);
        format!("{},{}", q.label(), n)
    }

    pub fn basis_state(&self, q: Qubit, n: usize) -> StateVector<T> {
        StateVector::basis(self.dim(), self.index(q, n))
    }

    /// `|g, 0⟩`
    pub fn ground(&self) -> StateVector<T> {
        self.basis_state(Qubit::Ground, 0)
    }
}

/// Dense Hamiltonian `H/h` in GHz for the given parameters.
pub fn assemble<T: Real>(space: &HilbertSpace<T>, p: &InstantParams<T>) -> OperatorMatrix<T> {
    let r = |x: T| Complex::new(x, T::zero());
    let half = T::lit(0.5);
    let zero_point = space.identity.scale(r(half));
    let terms = [
        (&space.num + &zero_point).scale(r(p.f_r)),
        space.sigma_z.scale(r(p.f_0 * half)),
        space.sigma_x.matmul(&space.x).scale(r(p.g_xx)),
        space.sigma_z.matmul(&space.x2).scale(r(p.g_zz)),
        space.sigma_z.matmul(&space.x).scale(r(p.g_zx)),
        space.sigma_x.matmul(&space.x2).scale(r(p.g_xz)),
    ];
    let mut h = OperatorMatrix::zeros(space.dim());
    for t in &terms {
        h = &h + t;
    }
    h.with_hermitian_flag(true)
}

/// `f_0 σ⁺σ⁻ + f_r a†a + g σz (a† + a)`: the bare longitudinal model.
pub fn longitudinal_model<T: Real>(space: &HilbertSpace<T>, f_0: T, f_r: T, g_zx: T) -> OperatorMatrix<T> {
    coupled_model(space, f_0, f_r, &space.sigma_z.matmul(&space.x).scale(Complex::new(g_zx, T::zero())))
}

/// `f_0 σ⁺σ⁻ + f_r a†a + g σx (a† + a)`: the bare transverse (Rabi) model.
pub fn transverse_model<T: Real>(space: &HilbertSpace<T>, f_0: T, f_r: T, g_xx: T) -> OperatorMatrix<T> {
    coupled_model(space, f_0, f_r, &space.sigma_x.matmul(&space.x).scale(Complex::new(g_xx, T::zero())))
}

fn coupled_model<T: Real>(
    space: &HilbertSpace<T>,
    f_0: T,
    f_r: T,
    coupling: &OperatorMatrix<T>,
) -> OperatorMatrix<T> {
    let r = |x: T| Complex::new(x, T::zero());
    let qubit = space.sigma_plus.matmul(&space.sigma_minus).scale(r(f_0));
    let field = space.num.scale(r(f_r));
    (&(&qubit + &field) + coupling).with_hermitian_flag(true)
}

/// Levels of the displaced longitudinal model: `q f_0 + n f_r - g²/f_r`, ascending.
pub fn longitudinal_reference_spectrum<T: Real>(space: &HilbertSpace<T>, f_0: T, f_r: T, g_zx: T) -> Vec<T> {
    let shift = g_zx * g_zx / f_r;
    let mut levels: Vec<T> = (0..2)
        .flat_map(|q| {
            (0..=space.n_max()).map(move |n| {
                T::from_usize(q).unwrap() * f_0 + T::from_usize(n).unwrap() * f_r - shift
            })
        })
        .collect();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    levels
}

/// Non-zero elements of `m` as `(row, col, value)`, row-major.
pub fn nonzero_structure<T: Real>(m: &OperatorMatrix<T>) -> Vec<(usize, usize, Complex<T>)> {
    let n = m.dim();
    (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter_map(|(r, c)| {
            let z = m[(r, c)];
            (!z.is_zero()).then_some((r, c, z))
        })
        .collect()
}

pub(crate) const N_TERMS: usize = 6;

/// The operators multiplying `f_r, f_0, g_xx, g_zz, g_zx, g_xz` in `H/h`.
fn term_operators<T: Real>(space: &HilbertSpace<T>) -> [OperatorMatrix<T>; N_TERMS] {
    let half = Complex::new(T::lit(0.5), T::zero());
    [
        &space.num + &space.identity.scale(half),
        space.sigma_z.scale(half),
        space.sigma_x.matmul(&space.x),
        space.sigma_z.matmul(&space.x2),
        space.sigma_z.matmul(&space.x),
        space.sigma_x.matmul(&space.x2),
    ]
}

/// Per-term weights of the mean diagonal over the `n ≤ 1` block.
fn reference_weights<T: Real>(space: &HilbertSpace<T>, ops: &[OperatorMatrix<T>; N_TERMS]) -> [T; N_TERMS] {
    let block: Vec<usize> = [(Qubit::Ground, 0), (Qubit::Excited, 0), (Qubit::Ground, 1), (Qubit::Excited, 1)]
        .iter()
        .map(|&(q, n)| space.index(q, n))
        .collect();
    let mut weights = [T::zero(); N_TERMS];
    for (w, op) in weights.iter_mut().zip(ops) {
        *w = block.iter().fold(T::zero(), |s, &i| s + op[(i, i)].re) / T::lit(block.len() as f64);
    }
    weights
}

#[derive(Debug, Clone, Copy)]
struct TermEntry<T> {
    row: u32,
    col: u32,
    term: u8,
    value: T,
}

/// Sparse real form of the six operator terms of `H/h`, for repeated
/// application at changing parameters.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms<T> {
    dim: usize,
    entries: Vec<TermEntry<T>>,
    row_ptr: Vec<usize>,
    reference_weights: [T; N_TERMS],
}

impl<T: Real> HamiltonianTerms<T> {
    pub fn new(space: &HilbertSpace<T>) -> Self {
        let ops = term_operators(space);
        let dim = space.dim();
        let mut entries = Vec::new();
        let mut row_ptr = vec![0];
        for row in 0..dim {
            for (term, op) in ops.iter().enumerate() {
                for col in 0..dim {
                    let z = op[(row, col)];
                    debug_assert!(z.im == T::zero());
                    if z.re != T::zero() {
                        entries.push(TermEntry {
                            row: row as u32,
                            col: col as u32,
                            term: term as u8,
                            value: z.re,
                        });
                    }
                }
            }
            row_ptr.push(entries.len());
        }
        let reference_weights = reference_weights(space, &ops);
        Self {
            dim,
            entries,
            row_ptr,
            reference_weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(p: &InstantParams<T>) -> [T; N_TERMS] {
        [p.f_r, p.f_0, p.g_xx, p.g_zz, p.g_zx, p.g_xz]
    }

    /// Mean diagonal energy of the `n ≤ 1` block: a scalar offset that
    /// centres the low-lying levels on zero.
    pub fn reference_energy(&self, coef: &[T; N_TERMS]) -> T {
        coef.iter()
            .zip(&self.reference_weights)
            .fold(T::zero(), |s, (c, w)| s + *c * *w)
    }

    /// `out = (H - shift) ψ`.
    #[inline]
    pub fn apply(&self, coef: &[T; N_TERMS], shift: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
        self.apply_with(coef, shift, psi, out, |re, im| Complex::new(re, im));
    }

    #[inline(always)]
    fn apply_with(
        &self,
        coef: &[T; N_TERMS],
        shift: T,
        psi: &[Complex<T>],
        out: &mut [Complex<T>],
        finish: impl Fn(T, T) -> Complex<T>,
    ) {
        assert!(psi.len() == self.dim && out.len() == self.dim);
        for (row, o) in out.iter_mut().enumerate() {
            let mut re = -shift * psi[row].re;
            let mut im = -shift * psi[row].im;
            for e in &self.entries[self.row_ptr[row]..self.row_ptr[row + 1]] {
                let w = coef[e.term as usize] * e.value;
                let src = psi[e.col as usize];
                re = re + w * src.re;
                im = im + w * src.im;
            }
            *o = finish(re, im);
        }
    }

    pub fn dense(&self, coef: &[T; N_TERMS]) -> OperatorMatrix<T> {
        let mut m = OperatorMatrix::zeros(self.dim);
        for e in &self.entries {
            let z = &mut m[(e.row as usize, e.col as usize)];
            *z = *z + Complex::new(coef[e.term as usize] * e.value, T::zero());
        }
        m.with_hermitian_flag(true)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

/// Photon-number offsets spanned by the coupling operators.
const HALF_BAND: usize = BANDS / 2;

/// Banded form of `s (H/h - E_ref)` for the RK4 hot loop.
///
/// With the basis ordered `q·(n_max+1) + n`, each of the four qubit blocks of
/// `H` only couples `n` to `n + d` for `|d| ≤ 2`. States are stored as one
/// [`Cell`] per photon number holding both qubit amplitudes, padded with two
/// zero cells at each end so the five-cell window never leaves the buffer.
/// Every off-diagonal weight is one coefficient times a fixed operator value,
/// so a [`BandWeights`] only holds the per-slot coefficients and the diagonal.
#[derive(Debug, Clone)]
pub(crate) struct BandedTerms<T> {
    m: usize,
    /// Term multiplying each off-diagonal weight lane. The operator structure
    /// makes it independent of the photon number.
    slot_term: [[u8; 4]; SLOTS],
    /// Off-diagonal operator values per photon number (diagonal lanes zero).
    value: Vec<CellWeights<T>>,
    /// Main-diagonal value of every term for the ground and excited row.
    diagonal: Vec<[[T; N_TERMS]; 2]>,
}

const SLOTS: usize = 2 * BANDS;

/// `s (H - E_ref)` at one set of coefficients, in the form
/// [`BandedTerms::apply_rotated`] consumes.
#[derive(Debug, Clone)]
pub(crate) struct BandWeights<T> {
    /// Coefficient of every off-diagonal weight lane.
    factor: CellWeights<T>,
    /// Per photon number, `[[d_g, d_g, 0, 0], [0, 0, d_e, d_e]]`.
    diagonal: Vec<[Cell<T>; 2]>,
}

impl<T: Real> BandedTerms<T> {
    pub(crate) fn new(space: &HilbertSpace<T>) -> Self {
        let m = space.n_max() + 1;
        let ops = term_operators(space);
        let reference = reference_weights(space, &ops);
        let mut slot_term = [[u8::MAX; 4]; SLOTS];
        let mut value = vec![[[T::zero(); 4]; SLOTS]; m];
        for (n, values) in value.iter_mut().enumerate() {
            for qr in 0..2 {
                for qc in 0..2 {
                    for d in 0..BANDS {
                        let c = n + d;
                        if (qr == qc && d == HALF_BAND) || c < HALF_BAND || c - HALF_BAND >= m {
                            continue;
                        }
                        let slot = qr * BANDS + d;
                        for (term, op) in ops.iter().enumerate() {
                            let v = op[(qr * m + n, qc * m + c - HALF_BAND)].re;
                            if v == T::zero() {
                                continue;
                            }
                            for lane in 2 * qc..2 * qc + 2 {
                                let owner = &mut slot_term[slot][lane];
                                assert!(
                                    *owner == u8::MAX || *owner == term as u8,
                                    "coupling terms overlap off the diagonal"
                                );
                                *owner = term as u8;
                                values[slot][lane] = v;
                            }
                        }
                    }
                }
            }
        }
        for t in slot_term.iter_mut().flatten().filter(|t| **t == u8::MAX) {
            *t = 0;
        }
        let diagonal = (0..m)
            .map(|n| {
                std::array::from_fn(|q| {
                    let r = q * m + n;
                    std::array::from_fn(|term| ops[term][(r, r)].re - reference[term])
                })
            })
            .collect();
        debug_assert!(Self::covers(space, &ops), "coupling reaches beyond the band");
        Self {
            m,
            slot_term,
            value,
            diagonal,
        }
    }

    fn covers(space: &HilbertSpace<T>, ops: &[OperatorMatrix<T>; N_TERMS]) -> bool {
        let m = space.n_max() + 1;
        ops.iter().all(|op| {
            (0..op.dim()).all(|r| {
                (0..op.dim()).all(|c| op[(r, c)].re == T::zero() || (r % m).abs_diff(c % m) <= HALF_BAND)
            })
        })
    }

    pub(crate) fn zero_weights(&self) -> BandWeights<T> {
        BandWeights {
            factor: [[T::zero(); 4]; SLOTS],
            diagonal: vec![[[T::zero(); 4]; 2]; self.m],
        }
    }

    pub(crate) fn padded_len(&self) -> usize {
        self.m + 2 * HALF_BAND
    }

    pub(crate) fn pad(&self, psi: &[Complex<T>], padded: &mut [Cell<T>]) {
        let m = self.m;
        padded.fill([T::zero(); 4]);
        for (n, cell) in padded[HALF_BAND..HALF_BAND + m].iter_mut().enumerate() {
            let (g, e) = (psi[n], psi[m + n]);
            *cell = [g.re, g.im, e.re, e.im];
        }
    }

    pub(crate) fn unpad(&self, padded: &[Cell<T>], psi: &mut [Complex<T>]) {
        let m = self.m;
        for (n, cell) in padded[HALF_BAND..HALF_BAND + m].iter().enumerate() {
            psi[n] = Complex::new(cell[0], cell[1]);
            psi[m + n] = Complex::new(cell[2], cell[3]);
        }
    }

    /// Fills `w` with the weights of `s (H - E_ref)` at `coef`.
    pub(crate) fn weights(&self, coef: &[T; N_TERMS], s: T, w: &mut BandWeights<T>) {
        assert_eq!(w.diagonal.len(), self.m);
        let scaled = coef.map(|c| c * s);
        for (f, t) in w.factor.as_flattened_mut().iter_mut().zip(self.slot_term.as_flattened()) {
            *f = scaled[*t as usize];
        }
        for (o, d) in w.diagonal.iter_mut().zip(&self.diagonal) {
            let [g, e] = d.map(|dq| (0..N_TERMS).fold(T::zero(), |acc, t| acc + scaled[t] * dq[t]));
            o[0][0] = g;
            o[0][1] = g;
            o[1][2] = e;
            o[1][3] = e;
        }
    }

    /// `out = -i M ψ` on padded buffers, for the matrix `M` held in `w`.
    /// The padding of `out` is left untouched.
    #[inline]
    pub(crate) fn apply_rotated(&self, w: &BandWeights<T>, psi: &[Cell<T>], out: &mut [Cell<T>]) {
        T::band_apply(&w.factor, &self.value, &w.diagonal, psi, out);
    }
}

pub(crate) fn zero_vec<T: Real>(n: usize) -> Vec<Complex<T>> {
    vec![Complex::zero(); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{default_constants, CircuitConstants, Regime};
    use crate::linalg::HermitianEigen;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn basis_indexing_is_bijective() {
        let s = HilbertSpace::<f64>::new(5).unwrap();
        assert_eq!(s.dim(), 12);
        let mut seen = vec![false; s.dim()];
        for q in [Qubit::Ground, Qubit::Excited] {
            for n in 0..=5 {
                let i = s.index(q, n);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(s.state_of(i), (q, n));
            }
        }
        assert!(seen.into_iter().all(|b| b));
        assert_eq!(s.label(s.index(Qubit::Excited, 1)), "e,1");
    }

    #[test]
    fn rejects_zero_truncation() {
        assert!(matches!(HilbertSpace::<f64>::new(0), Err(Error::Truncation(0))));
    }

    #[test]
    fn fock_examples() {
        let s = HilbertSpace::<f64>::new(1).unwrap();
        // Fock block of X in the ground sector
        assert_eq!(s.x[(0, 0)], c(0.0));
        assert_eq!(s.x[(0, 1)], c(1.0));
        assert_eq!(s.x[(1, 0)], c(1.0));
        assert_eq!(s.x[(1, 1)], c(0.0));

        let s2 = HilbertSpace::<f64>::new(2).unwrap();
        for n in 0..=2 {
            assert!((s2.num[(n, n)].re - n as f64).abs() < 1e-15);
            assert!((s2.num[(3 + n, 3 + n)].re - n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn truncated_commutator() {
        for n_max in [1, 3, 8] {
            let s = HilbertSpace::<f64>::new(n_max).unwrap();
            let comm = s.a.commutator(&s.a_dag);
            for q in [Qubit::Ground, Qubit::Excited] {
                for n in 0..=n_max {
                    let i = s.index(q, n);
                    let expected = if n < n_max { 1.0 } else { -(n_max as f64) };
                    assert!((comm[(i, i)].re - expected).abs() < 1e-12);
                }
            }
            let off = (0..s.dim())
                .flat_map(|r| (0..s.dim()).map(move |c| (r, c)))
                .filter(|(r, c)| r != c)
                .fold(0.0f64, |m, (r, col)| m.max(comm[(r, col)].norm()));
            assert!(off < 1e-12);
        }
    }

    #[test]
    fn decoupled_hamiltonian_is_diagonal() {
        let s = HilbertSpace::<f64>::new(4).unwrap();
        let p = InstantParams {
            f_r: 7.0,
            f_0: 5.0,
            ..Default::default()
        };
        let h = assemble(&s, &p);
        for i in 0..s.dim() {
            let (q, n) = s.state_of(i);
            let sign = if q == Qubit::Excited { 1.0 } else { -1.0 };
            assert!((h[(i, i)].re - (7.0 * (n as f64 + 0.5) + sign * 2.5)).abs() < 1e-12);
            for j in 0..s.dim() {
                if i != j {
                    assert_eq!(h[(i, j)], c(0.0));
                }
            }
        }
    }

    #[test]
    fn counter_rotating_element() {
        let s = HilbertSpace::<f64>::new(1).unwrap();
        let p = InstantParams {
            f_r: 1.0,
            f_0: 1.0,
            g_xx: 0.1,
            ..Default::default()
        };
        let h = assemble(&s, &p);
        let e1 = s.index(Qubit::Excited, 1);
        let g0 = s.index(Qubit::Ground, 0);
        assert!((h[(e1, g0)].re - 0.1).abs() < 1e-15);

        let consts: CircuitConstants<f64> = default_constants();
        let t = consts.limit_params(Regime::Transverse);
        let s8 = HilbertSpace::<f64>::new(8).unwrap();
        let h = assemble(&s8, &t);
        let (e1, g0) = (s8.index(Qubit::Excited, 1), s8.index(Qubit::Ground, 0));
        assert_eq!(h[(e1, g0)].re, t.g_xx);
    }

    #[test]
    fn transverse_limit_has_no_longitudinal_terms() {
        let consts: CircuitConstants<f64> = default_constants();
        let t = consts.limit_params(Regime::Transverse);
        let s = HilbertSpace::<f64>::new(6).unwrap();
        let h = assemble(&s, &t);
        let half = c(0.5);
        let expected = [
            (&s.num + &s.identity.scale(half)).scale(c(t.f_r)),
            s.sigma_z.scale(c(t.f_0 / 2.0)),
            s.sigma_x.matmul(&s.x).scale(c(t.g_xx)),
            s.sigma_z.matmul(&s.x2).scale(c(t.g_zz)),
        ]
        .iter()
        .fold(OperatorMatrix::zeros(s.dim()), |acc, m| &acc + m);
        assert!(h.max_diff(&expected) < 1e-14);
    }

    #[test]
    fn banded_generator_matches_dense() {
        use crate::linalg::test_support::random_state;
        use rand::SeedableRng;
        let consts: CircuitConstants<f64> = default_constants();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n_max in [1, 2, 3, 8, 16] {
            let s = HilbertSpace::<f64>::new(n_max).unwrap();
            let banded = BandedTerms::new(&s);
            let terms = HamiltonianTerms::new(&s);
            let mut w = banded.zero_weights();
            let mut padded = vec![[0.0; 4]; banded.padded_len()];
            let mut out = padded.clone();
            let mut result = zero_vec(s.dim());
            for phi in [0.0, 1.1, 5.0, consts.longitudinal_phase()] {
                let p = consts.instant_params(phi).unwrap();
                let coef = HamiltonianTerms::coefficients(&p);
                let shift = terms.reference_energy(&coef);
                let psi = random_state(&mut rng, s.dim());
                banded.weights(&coef, 2.0, &mut w);
                banded.pad(psi.as_slice(), &mut padded);
                banded.apply_rotated(&w, &padded, &mut out);
                assert!(out.iter().flatten().all(|x| x.is_finite()));
                banded.unpad(&out, &mut result);
                let h = assemble(&s, &p);
                let expected: Vec<_> = h
                    .apply(&psi)
                    .as_slice()
                    .iter()
                    .zip(psi.as_slice())
                    .map(|(hz, z)| (hz - z * shift) * Complex::new(0.0, -2.0))
                    .collect();
                let scale = h.max_abs();
                for (a, b) in result.iter().zip(&expected) {
                    assert!((a - b).norm() < 1e-13 * scale, "n_max {n_max}, phi {phi}");
                }
            }
        }
    }

    #[test]
    fn sparse_terms_match_dense_assembly() {
        let consts: CircuitConstants<f64> = default_constants();
        let s = HilbertSpace::<f64>::new(8).unwrap();
        let terms = HamiltonianTerms::new(&s);
        for phi in [0.0, 3.3, consts.longitudinal_phase()] {
            let p = consts.instant_params(phi).unwrap();
            let coef = HamiltonianTerms::coefficients(&p);
            let dense = assemble(&s, &p);
            assert!(terms.dense(&coef).max_diff(&dense) < 1e-13);
            let psi = s.ground();
            let mut out = zero_vec(s.dim());
            terms.apply(&coef, 0.0, psi.as_slice(), &mut out);
            assert!(StateVector::from_vec(out).max_diff(&dense.apply(&psi)) < 1e-13);
            assert_eq!(terms.reference_energy(&coef), p.f_r);
        }
    }

    #[test]
    fn hermitian_over_phase_grid() {
        let consts: CircuitConstants<f64> = default_constants();
        let s = HilbertSpace::<f64>::new(8).unwrap();
        for i in 0..100 {
            let phi = consts.longitudinal_phase() * i as f64 / 99.0;
            let h = assemble(&s, &consts.instant_params(phi).unwrap());
            assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs());
            assert!(h.is_hermitian());
        }
    }

    #[test]
    fn reference_spectrum_examples() {
        let s = HilbertSpace::<f64>::new(3).unwrap();
        let plain = longitudinal_reference_spectrum(&s, 5.0, 7.0, 0.0);
        assert_eq!(plain, vec![0.0, 5.0, 7.0, 12.0, 14.0, 19.0, 21.0, 26.0]);
        let shifted = longitudinal_reference_spectrum(&s, 5.0, 7.0, 0.7);
        for (a, b) in plain.iter().zip(&shifted) {
            assert!((a - b - 0.07).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_oracle() {
        let s = HilbertSpace::<f64>::new(20).unwrap();
        let (f_0, f_r, g) = (5.0, 7.0, 0.7);
        let eig = HermitianEigen::new(&longitudinal_model(&s, f_0, f_r, g)).unwrap();
        let reference = longitudinal_reference_spectrum(&s, f_0, f_r, g);
        for (a, b) in eig.values.iter().zip(&reference).take(s.dim() / 2) {
            assert!((a - b).abs() < 1e-6 * f_r, "{a} vs {b}");
        }
    }

    #[test]
    fn ground_energy_converged_in_truncation() {
        let consts: CircuitConstants<f64> = default_constants();
        for regime in [Regime::Transverse, Regime::Longitudinal] {
            let p = consts.limit_params(regime);
            let lowest = |n_max| {
                let s = HilbertSpace::<f64>::new(n_max).unwrap();
                HermitianEigen::new(&assemble(&s, &p)).unwrap().values[0]
            };
            assert!((lowest(8) - lowest(16)).abs() < 1e-9 * p.f_r);
        }
    }
}
