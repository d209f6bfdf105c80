//! Small stabilizer-tableau simulator used to check the graph rewrite rules.
//!
//! Rows are stored as bit masks, one bit per qubit, so the tableau is capped
//! at [`MAX_QUBITS`]. Sign bits are tracked through measurement updates with
//! the usual phase bookkeeping, but equivalence checks compare the GF(2) row
//! spaces only.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::graphstate::GraphState;

pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{0} qubits exceeds the oracle limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit {q} out of range for {n} qubits")]
    QubitOutOfRange { q: usize, n: usize },
    #[error("forced outcome {forced} contradicts deterministic outcome {actual}")]
    ContradictedOutcome { forced: bool, actual: bool },
    #[error("tableaux have {0} and {1} qubits")]
    SizeMismatch(usize, usize),
    #[error("generators do not commute or are dependent")]
    InvalidGenerators,
}

/// A Pauli operator without phase: bit `q` of `x`/`z` selects X/Z on qubit
/// `q`, both bits together mean Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Pauli {
    pub x: u32,
    pub z: u32,
}

impl Pauli {
    pub fn single(basis: Basis, q: usize) -> Self {
        let bit = 1u32 << q;
        match basis {
            Basis::X => Self { x: bit, z: 0 },
            Basis::Y => Self { x: bit, z: bit },
            Basis::Z => Self { x: 0, z: bit },
        }
    }

    pub fn times(self, other: Self) -> Self {
        Self { x: self.x ^ other.x, z: self.z ^ other.z }
    }

    pub fn commutes_with(self, other: Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    fn support(self) -> u32 {
        self.x | self.z
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<Pauli>,
    signs: Vec<bool>,
}

/// Phase exponent (power of i) picked up by one qubit of `P1 * P2`.
fn phase_term(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

/// Product `(s1, p1) * (s2, p2)` of two commuting signed Paulis.
fn signed_product(n: usize, s1: bool, p1: Pauli, s2: bool, p2: Pauli) -> (bool, Pauli) {
    let mut phase = 2 * s1 as i32 + 2 * s2 as i32;
    for q in 0..n {
        let bit = 1u32 << q;
        phase += phase_term(p1.x & bit != 0, p1.z & bit != 0, p2.x & bit != 0, p2.z & bit != 0);
    }
    let phase = phase.rem_euclid(4);
    debug_assert!(phase == 0 || phase == 2, "product of commuting Paulis must be Hermitian");
    (phase == 2, p1.times(p2))
}

fn check_size(n: usize) -> Result<(), OracleError> {
    if n > MAX_QUBITS {
        Err(OracleError::TooManyQubits(n))
    } else {
        Ok(())
    }
}

impl Tableau {
    /// Stabilizers `X_v ∏_{w ∈ N(v)} Z_w` of a graph state, all with + sign.
    ///
    /// Every vertex id gets a generator. Retired vertices have no bonds and
    /// therefore contribute a bare `X_v`, which callers drop with
    /// [`groups_equal_up_to_sign`] restricted to the surviving qubits.
    pub fn from_graph(g: &GraphState) -> Result<Self, OracleError> {
        let n = g.len();
        check_size(n)?;
        let rows = (0..n)
            .map(|v| Pauli {
                x: 1 << v,
                z: g.neighbors(v).fold(0, |acc, w| acc | (1 << w)),
            })
            .collect();
        Ok(Self { n, rows, signs: alloc::vec![false; n] })
    }

    pub fn from_rows(n: usize, rows: Vec<(bool, Pauli)>) -> Result<Self, OracleError> {
        check_size(n)?;
        let (signs, rows): (Vec<bool>, Vec<Pauli>) = rows.into_iter().unzip();
        let t = Self { n, rows, signs };
        if t.rows.len() != n || !t.rows_commute() || !t.rows_independent() {
            return Err(OracleError::InvalidGenerators);
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> impl Iterator<Item = (bool, Pauli)> + '_ {
        self.signs.iter().copied().zip(self.rows.iter().copied())
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        self.rows.swap(i, j);
        self.signs.swap(i, j);
    }

    pub fn rows_commute(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, a)| self.rows[i + 1..].iter().all(|b| a.commutes_with(*b)))
    }

    pub fn rows_independent(&self) -> bool {
        rank(self.rows.iter().map(|p| pack(*p)).collect()) == self.rows.len()
    }

    /// Measures a (possibly multi-qubit) Pauli observable.
    ///
    /// Returns `(outcome, deterministic)`, outcome `false` meaning the +1
    /// eigenvalue. A forced outcome only steers random measurements; forcing a
    /// deterministic one to the other value is an error.
    pub fn measure_observable<R: Rng + ?Sized>(
        &mut self,
        obs: Pauli,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<(bool, bool), OracleError> {
        let limit = (1u32 << self.n) - 1;
        if obs.support() & !limit != 0 {
            return Err(OracleError::QubitOutOfRange {
                q: (31 - (obs.support() & !limit).leading_zeros()) as usize,
                n: self.n,
            });
        }

        let anti: Vec<usize> = (0..self.n).filter(|&i| !self.rows[i].commutes_with(obs)).collect();
        match anti.split_first() {
            None => {
                let actual = self.deterministic_sign(obs);
                if let Some(forced) = forced {
                    if forced != actual {
                        return Err(OracleError::ContradictedOutcome { forced, actual });
                    }
                }
                Ok((actual, true))
            }
            Some((&pivot, rest)) => {
                for &i in rest {
                    let (s, p) =
                        signed_product(self.n, self.signs[i], self.rows[i], self.signs[pivot], self.rows[pivot]);
                    self.signs[i] = s;
                    self.rows[i] = p;
                }
                let outcome = forced.unwrap_or_else(|| rng.gen_bool(0.5));
                self.rows[pivot] = obs;
                self.signs[pivot] = outcome;
                Ok((outcome, false))
            }
        }
    }

    /// Single-qubit measurement returning the updated tableau.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &self,
        basis: Basis,
        q: usize,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<(Self, bool, bool), OracleError> {
        if q >= self.n {
            return Err(OracleError::QubitOutOfRange { q, n: self.n });
        }
        let mut t = self.clone();
        let (outcome, deterministic) = t.measure_observable(Pauli::single(basis, q), forced, rng)?;
        Ok((t, outcome, deterministic))
    }

    /// Sign of `obs` as an element of the stabilizer group. The caller
    /// guarantees that `obs` commutes with every row.
    fn deterministic_sign(&self, obs: Pauli) -> bool {
        // Gaussian elimination tracking which original rows make up each
        // reduced row.
        let mut reduced: Vec<(u32, u32)> =
            self.rows.iter().enumerate().map(|(i, p)| (pack(*p), 1u32 << i)).collect();
        let mut target = (pack(obs), 0u32);
        let mut next = 0;
        for bit in 0..2 * MAX_QUBITS {
            let mask = 1u32 << bit;
            let Some(p) = (next..reduced.len()).find(|&i| reduced[i].0 & mask != 0) else {
                continue;
            };
            reduced.swap(next, p);
            let pivot = reduced[next];
            for (i, r) in reduced.iter_mut().enumerate() {
                if i != next && r.0 & mask != 0 {
                    r.0 ^= pivot.0;
                    r.1 ^= pivot.1;
                }
            }
            if target.0 & mask != 0 {
                target.0 ^= pivot.0;
                target.1 ^= pivot.1;
            }
            next += 1;
        }
        debug_assert_eq!(target.0, 0, "observable commutes with a full stabilizer group");

        let (mut sign, mut acc) = (false, Pauli::default());
        for i in 0..self.n {
            if target.1 & (1 << i) != 0 {
                (sign, acc) = signed_product(self.n, sign, acc, self.signs[i], self.rows[i]);
            }
        }
        debug_assert_eq!(acc, obs);
        sign
    }
}

fn pack(p: Pauli) -> u32 {
    p.x | (p.z << MAX_QUBITS)
}

fn rank(mut rows: Vec<u32>) -> usize {
    let mut r = 0;
    for bit in 0..2 * MAX_QUBITS {
        let mask = 1u32 << bit;
        let Some(p) = (r..rows.len()).find(|&i| rows[i] & mask != 0) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        r += 1;
    }
    r
}

/// Reduced row-echelon basis of the subgroup supported on `keep`.
fn restricted_basis(t: &Tableau, keep: u32) -> Vec<u32> {
    let outside = !keep & ((1u32 << t.n) - 1);
    let outside_mask = outside | (outside << MAX_QUBITS);
    let mut rows: Vec<u32> = t.rows.iter().map(|p| pack(*p)).collect();

    // Eliminate the outside columns first; rows left without an outside
    // pivot span the subgroup acting trivially there.
    let mut r = 0;
    for bit in 0..2 * MAX_QUBITS {
        let mask = 1u32 << bit;
        if outside_mask & mask == 0 {
            continue;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i] & mask != 0) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        r += 1;
    }
    let mut inside: Vec<u32> = rows.split_off(r);
    debug_assert!(inside.iter().all(|v| v & outside_mask == 0));

    // Canonical RREF of the inside part.
    let mut k = 0;
    for bit in (0..2 * MAX_QUBITS).rev() {
        let mask = 1u32 << bit;
        let Some(p) = (k..inside.len()).find(|&i| inside[i] & mask != 0) else {
            continue;
        };
        inside.swap(k, p);
        let pivot = inside[k];
        for (i, row) in inside.iter_mut().enumerate() {
            if i != k && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        k += 1;
    }
    inside.truncate(k);
    inside.sort_unstable();
    inside
}

/// Whether the stabilizer subgroups of `t1` and `t2` supported on `qubits`
/// coincide, ignoring signs.
pub fn groups_equal_up_to_sign(t1: &Tableau, t2: &Tableau, qubits: &[usize]) -> Result<bool, OracleError> {
    if t1.n != t2.n {
        return Err(OracleError::SizeMismatch(t1.n, t2.n));
    }
    let mut keep = 0u32;
    for &q in qubits {
        if q >= t1.n {
            return Err(OracleError::QubitOutOfRange { q, n: t1.n });
        }
        keep |= 1 << q;
    }
    let a = restricted_basis(t1, keep);
    let b = restricted_basis(t2, keep);
    Ok(a.len() == qubits.len() && a == b)
}
