use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;

use super::FockError;
use crate::lattice::Lattice;

/// Default cap on the Fock-space dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 2_000_000;

/// Occupation-number basis of `N` bosons on `M` lattice sites.
///
/// States are stored in strictly decreasing lexicographic order, so the first
/// state is `(N, 0, ..., 0)` and the last `(0, ..., 0, N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockBasis {
    lattice: Lattice,
    n_particles: usize,
    occupations: Vec<u16>,
}

/// `C(n + m - 1, n)`, or `None` on overflow.
pub fn fock_dimension(sites: usize, particles: usize) -> Option<u128> {
    if sites == 0 {
        return Some(u128::from(particles == 0));
    }
    let k = particles.min(sites - 1) as u128;
    let top = (particles + sites - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(top - i)? / (i + 1);
    }
    Some(acc)
}

pub fn build_basis(lattice: &Lattice, n_particles: usize) -> Result<Arc<FockBasis>, FockError> {
    build_basis_with_cap(lattice, n_particles, DEFAULT_DIMENSION_CAP)
}

pub fn build_basis_with_cap(lattice: &Lattice, n_particles: usize, cap: usize) -> Result<Arc<FockBasis>, FockError> {
    let m = lattice.sites();
    let dim = fock_dimension(m, n_particles).ok_or(FockError::DimensionOverflow { dimension: None, cap })?;
    if dim > cap as u128 {
        return Err(FockError::DimensionOverflow { dimension: Some(dim), cap });
    }
    if n_particles > u16::MAX as usize {
        return Err(FockError::DimensionOverflow { dimension: Some(dim), cap });
    }
    let mut occupations = Vec::with_capacity(dim as usize * m);
    let mut current = vec![0u16; m];
    enumerate(&mut current, 0, n_particles, &mut occupations);
    debug_assert_eq!(occupations.len(), dim as usize * m);
    Ok(Arc::new(FockBasis { lattice: lattice.clone(), n_particles, occupations }))
}

fn enumerate(current: &mut [u16], site: usize, remaining: usize, out: &mut Vec<u16>) {
    if site + 1 == current.len() {
        current[site] = remaining as u16;
        out.extend_from_slice(current);
        return;
    }
    for n in (0..=remaining).rev() {
        current[site] = n as u16;
        enumerate(current, site + 1, remaining - n, out);
    }
    current[site] = 0;
}

impl FockBasis {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn sites(&self) -> usize {
        self.lattice.sites()
    }

    pub fn dimension(&self) -> usize {
        self.occupations.len() / self.sites()
    }

    pub fn state(&self, index: usize) -> &[u16] {
        let m = self.sites();
        &self.occupations[index * m..(index + 1) * m]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u16]> {
        self.occupations.chunks_exact(self.sites())
    }

    /// Position of an occupation vector, if it belongs to this basis.
    pub fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        if occupation.len() != self.sites() {
            return None;
        }
        let (mut lo, mut hi) = (0, self.dimension());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.state(mid).cmp(occupation) {
                Ordering::Equal => return Some(mid),
                // Descending order: larger states come first.
                Ordering::Greater => lo = mid + 1,
                Ordering::Less => hi = mid,
            }
        }
        None
    }

    pub fn same_space(&self, other: &FockBasis) -> bool {
        self.n_particles == other.n_particles && self.lattice == other.lattice
    }
}

/// A state in a fixed-`N` Fock basis.
#[derive(Clone, Debug)]
pub struct FockVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self, FockError> {
        if amplitudes.len() != basis.dimension() {
            return Err(FockError::Length { got: amplitudes.len(), want: basis.dimension() });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FockError::NonFinite);
        }
        Ok(Self { basis, amplitudes })
    }

    /// The basis state with the given occupations.
    pub fn basis_state(basis: Arc<FockBasis>, occupation: &[u16]) -> Result<Self, FockError> {
        let idx = basis.index_of(occupation).ok_or(FockError::NotInBasis)?;
        let mut amplitudes = vec![Complex64::default(); basis.dimension()];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    /// A single particle in orbital `phi` (site amplitudes); needs an `N = 1` basis.
    pub fn one_particle(basis: Arc<FockBasis>, phi: &[Complex64]) -> Result<Self, FockError> {
        if basis.n_particles() != 1 {
            return Err(FockError::WrongSector { expected: 1, got: basis.n_particles() });
        }
        Self::new(basis, phi.to_vec())
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|z| *z /= n);
        }
        self
    }

    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `a * self + b * other` on a shared basis.
    pub fn combine(&self, a: Complex64, other: &FockVector, b: Complex64) -> Result<Self, FockError> {
        if !self.basis.same_space(&other.basis) {
            return Err(FockError::BasisMismatch);
        }
        let amplitudes = self.amplitudes.iter().zip(&other.amplitudes).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { basis: self.basis.clone(), amplitudes })
    }

    pub fn distance(&self, other: &FockVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dim;

    /// Brute-force count of occupation vectors by nested enumeration.
    fn brute_count(m: usize, n: usize) -> usize {
        fn rec(m: usize, n: usize) -> usize {
            if m == 1 {
                return 1;
            }
            (0..=n).map(|k| rec(m - 1, n - k)).sum()
        }
        rec(m, n)
    }

    #[test]
    fn dimensions_match_enumeration() {
        let l2 = Lattice::new(Dim::One, 2, 1.0).unwrap();
        let b = build_basis(&l2, 2).unwrap();
        assert_eq!(b.dimension(), 3);
        let listed: Vec<Vec<u16>> = b.states().map(|s| s.to_vec()).collect();
        assert_eq!(listed, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);

        let l4 = Lattice::new(Dim::One, 4, 1.0).unwrap();
        assert_eq!(build_basis(&l4, 3).unwrap().dimension(), 20);
        assert_eq!(brute_count(4, 3), 20);
        for (m, n) in [(3, 5), (5, 4), (6, 2), (1, 7)] {
            let l = Lattice::new(Dim::One, m, 1.0).unwrap();
            assert_eq!(build_basis(&l, n).unwrap().dimension(), brute_count(m, n));
        }
    }

    #[test]
    fn vacuum_has_one_state() {
        let l = Lattice::new(Dim::Three, 3, 1.0).unwrap();
        let b = build_basis(&l, 0).unwrap();
        assert_eq!(b.dimension(), 1);
        assert!(b.state(0).iter().all(|&n| n == 0));
    }

    #[test]
    fn basis_is_sorted_and_lookup_is_a_bijection() {
        let l = Lattice::new(Dim::One, 5, 1.0).unwrap();
        let b = build_basis(&l, 4).unwrap();
        for i in 1..b.dimension() {
            assert!(b.state(i - 1) > b.state(i));
        }
        for i in 0..b.dimension() {
            assert_eq!(b.index_of(b.state(i)), Some(i));
            assert_eq!(b.state(i).iter().map(|&x| x as usize).sum::<usize>(), 4);
        }
        assert_eq!(b.index_of(&[1, 1, 1, 1, 1]), None);
    }

    #[test]
    fn dimension_cap_reports_size() {
        let l = Lattice::new(Dim::One, 64, 1.0).unwrap();
        match build_basis(&l, 6) {
            Err(FockError::DimensionOverflow { dimension: Some(d), .. }) => {
                assert_eq!(d, fock_dimension(64, 6).unwrap());
                assert!(d > DEFAULT_DIMENSION_CAP as u128);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
