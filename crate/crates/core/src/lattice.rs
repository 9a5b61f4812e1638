//! Exact lattice geometry attached to a rational direction `u`.
//!
//! For a primitive integer vector `u`, the kernel lattice
//! `K = {x ∈ Z^d : x·u = 0}` has a basis `u_2, ..., u_d` which, together with
//! any `c` satisfying `c·u = 1`, is a basis of `Z^d`. Every site therefore has
//! unique integer coordinates `(x·u, m_2, ..., m_d)` and the classes of
//! `Z^d / K` are indexed by the level `x·u`. Everything downstream (entry set,
//! cylinder vertices) is built on this decomposition.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::linalg::solve_rational;
use crate::model::{dot, int, to_f64, StepSet, WeightSystem};
use crate::{Error, Rational, Result, Site};

/// Returns `(g, a, b)` with `a·x + b·y = g = gcd(x, y) ≥ 0`.
pub fn ext_gcd(x: i64, y: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (x, y);
    let (mut a0, mut a1) = (1i64, 0i64);
    let (mut b0, mut b1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (a0, a1) = (a1, a0 - q * a1);
        (b0, b1) = (b1, b0 - q * b1);
    }
    if r0 < 0 {
        (-r0, -a0, -b0)
    } else {
        (r0, a0, b0)
    }
}

/// The positive multiple of `raw` with coprime integer coordinates.
pub fn normalize_direction(raw: &[Rational]) -> Result<Site> {
    if raw.is_empty() || raw.iter().all(Zero::is_zero) {
        return Err(Error::DegenerateDirection);
    }
    let lcm = raw.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let scaled: Vec<BigInt> = raw.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let gcd = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    scaled
        .iter()
        .map(|v| {
            (v / &gcd).to_i64().ok_or_else(|| Error::Parse {
                input: format!("{raw:?}"),
                reason: "direction coordinates overflow i64".into(),
            })
        })
        .collect()
}

/// Primitive form of an integer vector.
pub fn primitive(u: &[i64]) -> Result<Site> {
    let raw: Vec<Rational> = u.iter().map(|&c| int(c)).collect();
    normalize_direction(&raw)
}

/// Unimodular completion of a primitive `u`: returns `(c, basis)` where
/// `c·u = 1`, every basis vector is orthogonal to `u`, and `(c, basis)` is a
/// basis of `Z^d`.
fn unimodular_completion(u: &[i64]) -> Result<(Site, Vec<Site>)> {
    let d = u.len();
    // Columns of a unimodular matrix, tracked as vectors; `v` holds u^T·column.
    let mut cols: Vec<Site> = (0..d)
        .map(|i| {
            let mut e = vec![0; d];
            e[i] = 1;
            e
        })
        .collect();
    let mut v: Vec<i64> = u.to_vec();
    for i in 1..d {
        if v[i] == 0 {
            continue;
        }
        let (g, a, b) = ext_gcd(v[0], v[i]);
        let (p, q) = (v[i] / g, v[0] / g);
        let c0: Site = cols[0].iter().zip(&cols[i]).map(|(x, y)| a * x + b * y).collect();
        let ci: Site = cols[0].iter().zip(&cols[i]).map(|(x, y)| -p * x + q * y).collect();
        cols[0] = c0;
        cols[i] = ci;
        v[0] = g;
        v[i] = 0;
    }
    match v[0] {
        1 => {}
        -1 => cols[0].iter_mut().for_each(|x| *x = -*x),
        _ => return Err(Error::DegenerateDirection),
    }
    let c = cols.remove(0);
    for b in &mut cols {
        if b.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            b.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok((c, cols))
}

/// Basis of the kernel sublattice `{x ∈ Z^d : x·u = 0}` for a primitive `u`.
///
/// Empty in dimension one.
pub fn orthogonal_basis(u: &[i64]) -> Result<Vec<Site>> {
    Ok(unimodular_completion(u)?.1)
}

/// Exact determinant of a square integer matrix (fraction-free elimination).
pub fn determinant(rows: &[Site]) -> i128 {
    let n = rows.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(p) => {
                    m.swap(k, p);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn with_first(first: &[i64], rest: &[Site]) -> Vec<Site> {
    let mut rows = Vec::with_capacity(rest.len() + 1);
    rows.push(first.to_vec());
    rows.extend(rest.iter().cloned());
    rows
}

/// Coordinates `(t, s_2, ..., s_d)` of `x = t·u + Σ s_i·u_i`, exact.
pub fn frame_coordinates(u: &[i64], basis: &[Site], x: &[i64]) -> Result<Vec<Rational>> {
    let t = Rational::new(dot(x, u).into(), dot(u, u).into());
    let k = basis.len();
    let mut coords = vec![t];
    if k == 0 {
        return Ok(coords);
    }
    let gram: Vec<Vec<Rational>> =
        basis.iter().map(|a| basis.iter().map(|b| int(dot(a, b))).collect()).collect();
    let rhs: Vec<Rational> = basis.iter().map(|a| int(dot(a, x))).collect();
    coords.extend(solve_rational(gram, rhs)?);
    Ok(coords)
}

fn check_kernel_basis(u: &[i64], basis: &[Site]) -> Result<()> {
    let d = u.len();
    if basis.len() + 1 != d {
        return Err(Error::InvalidBasis(format!("expected {} vectors, got {}", d - 1, basis.len())));
    }
    for b in basis {
        if b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: b.len() });
        }
        if dot(b, u) != 0 {
            return Err(Error::InvalidBasis(format!("{b:?} is not orthogonal to {u:?}")));
        }
    }
    let det = determinant(&with_first(u, basis)).abs();
    if det != dot(u, u) as i128 {
        return Err(Error::InvalidBasis(format!(
            "|det| = {det} but ‖u‖² = {}; not a basis of the full kernel lattice",
            dot(u, u)
        )));
    }
    Ok(())
}

/// One representative per class of the discrete hyperplane
/// `H = {x : ∃e, (x−e)·u < 0 ≤ x·u}` modulo `Z u_2 + ... + Z u_d`, each lying in
/// `R_+ u + [0,u_2) + ... + [0,u_d)`, sorted lexicographically by frame
/// coordinates.
pub fn entry_points(u: &[i64], basis: &[Site], steps: &StepSet) -> Result<Vec<Site>> {
    if steps.dim() != u.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: steps.dim() });
    }
    let u = primitive(u)?;
    check_kernel_basis(&u, basis)?;
    let (c, _) = unimodular_completion(&u)?;
    let top = steps.steps().iter().map(|e| dot(e, &u)).max().unwrap_or(0);
    if top <= 0 {
        return Err(Error::EmptyEntrySet);
    }
    let mut points = Vec::with_capacity(top as usize);
    for h in 0..top {
        let mut x: Site = c.iter().map(|&ci| h * ci).collect();
        let coords = frame_coordinates(&u, basis, &x)?;
        for (s, b) in coords[1..].iter().zip(basis) {
            let shift = s.floor().to_integer().to_i64().ok_or(Error::DegenerateDirection)?;
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= shift * bi;
            }
        }
        let coords = frame_coordinates(&u, basis, &x)?;
        points.push((coords, x));
    }
    points.sort_by(|a, b| cmp_lex(&a.0, &b.0));
    Ok(points.into_iter().map(|(_, x)| x).collect())
}

fn cmp_lex(a: &[Rational], b: &[Rational]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// `μ(x) ∝ Σ_{e : (x−e)·u < 0} α_e` on the entry set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryMeasure {
    /// Unnormalized masses, aligned with the entry points.
    pub masses: Vec<Rational>,
    pub probabilities: Vec<Rational>,
    /// Normalizing constant `Z`.
    pub normalizer: Rational,
}

impl EntryMeasure {
    pub fn probabilities_f64(&self) -> Vec<f64> {
        self.probabilities.iter().map(to_f64).collect()
    }

    /// Index of an entry point drawn from `μ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let probs = self.probabilities_f64();
        let mut r: f64 = rng.random();
        for (i, p) in probs.iter().enumerate() {
            if r < *p {
                return i;
            }
            r -= p;
        }
        probs.len() - 1
    }
}

pub fn entry_measure(h0: &[Site], u: &[i64], w: &WeightSystem) -> Result<EntryMeasure> {
    if !w.drift_along(u).is_positive() {
        return Err(Error::DriftConditionViolated);
    }
    let masses: Vec<Rational> = h0
        .iter()
        .map(|x| {
            let level = dot(x, u);
            w.step_set()
                .steps()
                .iter()
                .zip(w.weights())
                .filter(|(e, _)| level - dot(e, u) < 0)
                .map(|(_, a)| a.clone())
                .sum()
        })
        .collect();
    let normalizer: Rational = masses.iter().sum();
    if !normalizer.is_positive() {
        return Err(Error::DriftConditionViolated);
    }
    let probabilities = masses.iter().map(|m| m / &normalizer).collect();
    Ok(EntryMeasure { masses, probabilities, normalizer })
}

/// Flux of `e` through `u^⊥`, scaled by the area of `[0,u_2]+...+[0,u_d]`:
/// `|det(e, u_2, ..., u_d)|` when `u·e > 0`, zero otherwise.
pub fn flux(u: &[i64], basis: &[Site], e: &[i64]) -> i64 {
    if dot(u, e) <= 0 {
        return 0;
    }
    determinant(&with_first(e, basis)).unsigned_abs() as i64
}

/// A primitive direction with its kernel basis, a cobasis vector `c` (`c·u = 1`)
/// and the entry set for a given step set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionFrame {
    u: Site,
    norm_sq: i64,
    scale: i64,
    basis: Vec<Site>,
    cobasis: Site,
    inverse: Vec<Site>,
    entry_points: Vec<Site>,
}

impl DirectionFrame {
    /// Frame for the primitive direction of `u` with the computed kernel basis.
    pub fn new(u: &[i64], steps: &StepSet) -> Result<Self> {
        let u = primitive(u)?;
        let basis = orthogonal_basis(&u)?;
        Self::with_basis(&u, basis, steps)
    }

    /// Frame for a caller-supplied kernel basis (must span the full kernel lattice).
    pub fn with_basis(u: &[i64], basis: Vec<Site>, steps: &StepSet) -> Result<Self> {
        let u = primitive(u)?;
        if steps.dim() != u.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), found: steps.dim() });
        }
        check_kernel_basis(&u, &basis)?;
        let (cobasis, _) = unimodular_completion(&u)?;
        let entry_points = entry_points(&u, &basis, steps)?;
        let inverse = integer_inverse(&cobasis, &basis)?;
        let norm_sq = dot(&u, &u);
        let max_sq = steps.max_norm_sq();
        let mut scale = 1;
        while scale * scale * norm_sq < max_sq {
            scale += 1;
        }
        Ok(Self { u, norm_sq, scale, basis, cobasis, inverse, entry_points })
    }

    /// Overrides the cylinder scale factor `k` (working direction `k·u`).
    pub fn with_scale(mut self, scale: i64) -> Result<Self> {
        if scale < 1 {
            return Err(Error::InvalidParameter(format!("scale must be ≥ 1, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn u(&self) -> &[i64] {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn norm_sq(&self) -> i64 {
        self.norm_sq
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn basis(&self) -> &[Site] {
        &self.basis
    }

    pub fn cobasis(&self) -> &[i64] {
        &self.cobasis
    }

    pub fn entry_points(&self) -> &[Site] {
        &self.entry_points
    }

    /// `x·u` for the primitive `u`.
    pub fn level(&self, x: &[i64]) -> i64 {
        dot(x, &self.u)
    }

    /// `|det(u, u_2, ..., u_d)|`, which equals `‖u‖²` for a full kernel basis.
    pub fn volume(&self) -> i64 {
        determinant(&with_first(&self.u, &self.basis)).unsigned_abs() as i64
    }

    /// Integer coordinates `(x·u, m)` with `x = (x·u)·c + Σ m_i u_i`.
    pub fn coordinates(&self, x: &[i64]) -> (i64, Site) {
        let level = dot(&self.inverse[0], x);
        let m = self.inverse[1..].iter().map(|row| dot(row, x)).collect();
        (level, m)
    }

    pub fn site(&self, level: i64, m: &[i64]) -> Site {
        let mut x: Site = self.cobasis.iter().map(|&c| level * c).collect();
        for (mi, b) in m.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += mi * bi;
            }
        }
        x
    }

    pub fn frame_coordinates(&self, x: &[i64]) -> Result<Vec<Rational>> {
        frame_coordinates(&self.u, &self.basis, x)
    }

    pub fn entry_measure(&self, w: &WeightSystem) -> Result<EntryMeasure> {
        entry_measure(&self.entry_points, &self.u, w)
    }

    pub fn flux(&self, e: &[i64]) -> i64 {
        flux(&self.u, &self.basis, e)
    }
}

/// Inverse of the unimodular matrix with columns `(c, u_2, ..., u_d)`, as rows.
fn integer_inverse(c: &[i64], basis: &[Site]) -> Result<Vec<Site>> {
    let d = c.len();
    let cols = with_first(c, basis);
    // Solve U·x = e_j for each unit vector; column j of U^{-1}.
    let matrix: Vec<Vec<Rational>> =
        (0..d).map(|i| cols.iter().map(|col| int(col[i])).collect()).collect();
    let mut inv = vec![vec![0i64; d]; d];
    for j in 0..d {
        let mut rhs = vec![Rational::zero(); d];
        rhs[j] = Rational::one();
        let x = solve_rational(matrix.clone(), rhs)?;
        for (i, v) in x.iter().enumerate() {
            if !v.is_integer() {
                return Err(Error::InvalidBasis("completion is not unimodular".into()));
            }
            inv[i][j] = v.to_integer().to_i64().ok_or(Error::DegenerateDirection)?;
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ratio;
    use alloc::collections::BTreeSet;

    fn nn(d: usize) -> StepSet {
        StepSet::nearest_neighbor(d).unwrap()
    }

    fn triangular() -> StepSet {
        StepSet::new(
            2,
            vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1], vec![1, 1], vec![-1, -1]],
        )
        .unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_direction(&[ratio(1, 2), ratio(1, 3)]).unwrap(), vec![3, 2]);
        assert_eq!(normalize_direction(&[int(2), int(1)]).unwrap(), vec![2, 1]);
        assert_eq!(normalize_direction(&[int(4), int(2)]).unwrap(), vec![2, 1]);
        assert_eq!(normalize_direction(&[int(-4), int(6)]).unwrap(), vec![-2, 3]);
        assert_eq!(normalize_direction(&[int(0), int(0)]), Err(Error::DegenerateDirection));
    }

    #[test]
    fn ext_gcd_identity() {
        for (x, y) in [(2, 1), (0, 5), (-4, 6), (7, -3), (0, 0), (12, 18)] {
            let (g, a, b) = ext_gcd(x, y);
            assert_eq!(a * x + b * y, g);
            assert!(g >= 0);
        }
    }

    fn check_basis(u: &[i64]) -> Vec<Site> {
        let basis = orthogonal_basis(u).unwrap();
        assert_eq!(basis.len(), u.len() - 1);
        for b in &basis {
            assert_eq!(dot(b, u), 0);
        }
        assert_eq!(determinant(&with_first(u, &basis)).abs(), dot(u, u) as i128);
        basis
    }

    #[test]
    fn kernel_bases() {
        assert_eq!(check_basis(&[1, 0]), vec![vec![0, 1]]);
        assert_eq!(check_basis(&[2, 1]), vec![vec![1, -2]]);
        check_basis(&[1, 1, 1]);
        check_basis(&[3, -5, 7]);
        check_basis(&[0, 0, 1]);
        assert!(orthogonal_basis(&[1]).unwrap().is_empty());
    }

    #[test]
    fn determinants() {
        assert_eq!(determinant(&[vec![2, 1], vec![1, -2]]), -5);
        assert_eq!(determinant(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(determinant(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]), -3);
        assert_eq!(determinant(&[vec![1, 2], vec![2, 4]]), 0);
    }

    /// Enumerates a box and keeps points of H whose frame coordinates along the
    /// kernel basis fall in [0,1), using Cramer's rule in d = 2.
    fn entry_oracle_2d(u: &[i64], b: &[i64], steps: &StepSet) -> BTreeSet<Site> {
        let top = steps.steps().iter().map(|e| dot(e, u)).max().unwrap();
        let det_ub = u[0] * b[1] - u[1] * b[0];
        let mut out = BTreeSet::new();
        for x0 in -20..=20 {
            for x1 in -20..=20 {
                let x = [x0, x1];
                let level = dot(&x, u);
                if !(0..top).contains(&level) {
                    continue;
                }
                let s = ratio(u[0] * x1 - u[1] * x0, det_ub);
                if s >= int(0) && s < int(1) {
                    out.insert(x.to_vec());
                }
            }
        }
        out
    }

    #[test]
    fn entry_points_examples() {
        let f = DirectionFrame::new(&[1, 0], &nn(2)).unwrap();
        assert_eq!(f.entry_points(), &[vec![0, 0]]);

        let f = DirectionFrame::new(&[2, 1], &nn(2)).unwrap();
        assert_eq!(f.entry_points(), &[vec![0, 0], vec![1, -1]]);
        let oracle = entry_oracle_2d(&[2, 1], &f.basis()[0], &nn(2));
        assert_eq!(f.entry_points().iter().cloned().collect::<BTreeSet<_>>(), oracle);

        let f = DirectionFrame::new(&[1, 1], &triangular()).unwrap();
        assert_eq!(f.entry_points().len(), 2);
        let oracle = entry_oracle_2d(&[1, 1], &f.basis()[0], &triangular());
        assert_eq!(f.entry_points().iter().cloned().collect::<BTreeSet<_>>(), oracle);
    }

    #[test]
    fn entry_points_live_in_h_and_fundamental_domain() {
        for u in [vec![3, 2], vec![1, -4], vec![5, 3], vec![1, 2, 3], vec![2, -1, 1]] {
            let steps = nn(u.len());
            let f = DirectionFrame::new(&u, &steps).unwrap();
            for x in f.entry_points() {
                let lvl = dot(x, &u);
                assert!(lvl >= 0);
                assert!(steps.steps().iter().any(|e| lvl - dot(e, &u) < 0));
                let coords = f.frame_coordinates(x).unwrap();
                assert!(coords[0] >= int(0));
                for s in &coords[1..] {
                    assert!(*s >= int(0) && *s < int(1), "{u:?} {x:?} {coords:?}");
                }
            }
            // Distinct levels means distinct classes modulo the full kernel.
            let levels: BTreeSet<i64> = f.entry_points().iter().map(|x| dot(x, &u)).collect();
            assert_eq!(levels.len(), f.entry_points().len());
        }
    }

    #[test]
    fn measure_examples() {
        let w = WeightSystem::from_integers(nn(2), &[2, 1, 1, 1]).unwrap();
        let f = DirectionFrame::new(&[1, 0], w.step_set()).unwrap();
        let m = f.entry_measure(&w).unwrap();
        assert_eq!(m.probabilities, vec![int(1)]);
        assert_eq!(m.normalizer, int(2));

        let f = DirectionFrame::new(&[2, 1], w.step_set()).unwrap();
        let m = f.entry_measure(&w).unwrap();
        assert_eq!(m.masses, vec![int(3), int(2)]);
        assert_eq!(m.probabilities, vec![ratio(3, 5), ratio(2, 5)]);
        assert_eq!(m.normalizer, int(5));

        let sym = WeightSystem::from_integers(nn(2), &[1, 1, 1, 1]).unwrap();
        assert_eq!(f.entry_measure(&sym), Err(Error::DriftConditionViolated));
    }

    /// Counts classes of {x : x·u ≤ 0 < (x+e)·u} modulo the lattice spanned by
    /// `b` (d = 2), deciding equivalence by solving x − y = k·b exactly.
    fn flux_oracle_2d(u: &[i64], b: &[i64], e: &[i64]) -> usize {
        let mut reps: Vec<[i64; 2]> = Vec::new();
        for x0 in -30..=30 {
            for x1 in -30..=30 {
                let x = [x0, x1];
                if !(dot(&x, u) <= 0 && dot(&x, u) + dot(e, u) > 0) {
                    continue;
                }
                let same = |y: &[i64; 2]| {
                    let diff = [x[0] - y[0], x[1] - y[1]];
                    if diff[0] * b[1] - diff[1] * b[0] != 0 {
                        return false;
                    }
                    let (num, den) = if b[0] != 0 { (diff[0], b[0]) } else { (diff[1], b[1]) };
                    num % den == 0
                };
                if !reps.iter().any(same) {
                    reps.push(x);
                }
            }
        }
        reps.len()
    }

    #[test]
    fn flux_examples() {
        let b = orthogonal_basis(&[2, 1]).unwrap();
        assert_eq!(flux(&[2, 1], &b, &[1, 0]), 2);
        assert_eq!(flux(&[2, 1], &b, &[-1, 0]), 0);
        assert_eq!(flux(&[2, 1], &b, &[0, 1]), 1);
        assert_eq!(flux_oracle_2d(&[2, 1], &b[0], &[1, 0]), 2);
        assert_eq!(flux_oracle_2d(&[2, 1], &b[0], &[0, 1]), 1);
        // A coarser orthogonal family doubles the class count and the determinant.
        let coarse = [vec![2, -4]];
        assert_eq!(flux(&[2, 1], &coarse, &[1, 0]), 4);
        assert_eq!(flux_oracle_2d(&[2, 1], &coarse[0], &[1, 0]), 4);
        assert_eq!(flux(&[2, 1], &coarse, &[1, 1]), 6);
        assert_eq!(flux_oracle_2d(&[2, 1], &coarse[0], &[1, 1]), 6);
    }

    #[test]
    fn coordinates_round_trip() {
        let f = DirectionFrame::new(&[2, -1, 3], &nn(3)).unwrap();
        for x in [vec![0, 0, 0], vec![1, 2, 3], vec![-5, 4, 7]] {
            let (lvl, m) = f.coordinates(&x);
            assert_eq!(lvl, f.level(&x));
            assert_eq!(f.site(lvl, &m), x);
        }
    }

    #[test]
    fn rejects_bad_bases() {
        let steps = nn(2);
        assert!(DirectionFrame::with_basis(&[2, 1], vec![vec![2, -4]], &steps).is_err());
        assert!(DirectionFrame::with_basis(&[2, 1], vec![vec![1, 1]], &steps).is_err());
        assert!(DirectionFrame::new(&[0, 0], &steps).is_err());
    }

    #[test]
    fn scale_covers_longest_step() {
        let f = DirectionFrame::new(&[1, 0], &nn(2)).unwrap();
        assert_eq!(f.scale(), 1);
        let long = StepSet::new(2, vec![vec![3, 0], vec![-1, 0], vec![0, 1], vec![0, -1]]).unwrap();
        let f = DirectionFrame::new(&[1, 0], &long).unwrap();
        assert_eq!(f.scale(), 3);
    }

    proptest::proptest! {
        #[test]
        fn flux_identity(u in proptest::collection::vec(-6i64..6, 3), e in proptest::collection::vec(-3i64..3, 3)) {
            proptest::prop_assume!(u.iter().any(|&c| c != 0));
            let u = primitive(&u).unwrap();
            let basis = orthogonal_basis(&u).unwrap();
            let neg: Site = e.iter().map(|c| -c).collect();
            let lhs = int(flux(&u, &basis, &e) - flux(&u, &basis, &neg));
            let vol = determinant(&with_first(&u, &basis)).abs() as i64;
            let rhs = Rational::new((vol * dot(&u, &e)).into(), dot(&u, &u).into());
            proptest::prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn basis_invariance(
            u in proptest::collection::vec(-5i64..5, 3),
            k in -3i64..3,
            swap in proptest::bool::ANY,
            ws in proptest::collection::vec(1i64..9, 6),
        ) {
            proptest::prop_assume!(u.iter().any(|&c| c != 0));
            let u = primitive(&u).unwrap();
            let steps = nn(3);
            let w = WeightSystem::from_integers(steps.clone(), &ws).unwrap();
            proptest::prop_assume!(w.drift_along(&u) > int(0));
            let f = DirectionFrame::new(&u, &steps).unwrap();
            // Unimodular change of basis: (b1, b2) -> (b1 + k b2, b2), optionally swapped.
            let b = f.basis();
            let b1: Site = b[0].iter().zip(&b[1]).map(|(x, y)| x + k * y).collect();
            let other = if swap { vec![b[1].clone(), b1] } else { vec![b1, b[1].clone()] };
            let g = DirectionFrame::with_basis(&u, other, &steps).unwrap();
            proptest::prop_assert_eq!(f.entry_points().len(), g.entry_points().len());
            let mut mu_f = f.entry_measure(&w).unwrap().probabilities;
            let mut mu_g = g.entry_measure(&w).unwrap().probabilities;
            mu_f.sort();
            mu_g.sort();
            proptest::prop_assert_eq!(mu_f, mu_g);
            // Deterministic output.
            let again = DirectionFrame::new(&u, &steps).unwrap();
            proptest::prop_assert_eq!(f.entry_points(), again.entry_points());
        }

        #[test]
        fn entry_measure_positive(u in proptest::collection::vec(-5i64..5, 2), ws in proptest::collection::vec(1i64..9, 4)) {
            proptest::prop_assume!(u.iter().any(|&c| c != 0));
            let steps = nn(2);
            let w = WeightSystem::from_integers(steps.clone(), &ws).unwrap();
            let f = DirectionFrame::new(&u, &steps).unwrap();
            if let Ok(m) = f.entry_measure(&w) {
                proptest::prop_assert!(m.probabilities.iter().all(|p| *p > int(0)));
                proptest::prop_assert_eq!(m.probabilities.iter().sum::<Rational>(), int(1));
            }
        }
    }
}
