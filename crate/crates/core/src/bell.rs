//! Exact combinatorics behind the expansion coefficients.
//!
//! * [`enumerate_partitions`] lists the index set `P(j, l)`: ordered `l`-tuples
//!   of nonnegative integers with `n_1 + … + n_l = j − l + 1` and
//!   `n_1 + 2 n_2 + … + l n_l = j`.
//! * [`enumerate_compositions`] lists `Q(m, r)`: compositions of `m` into `r`
//!   positive parts.
//! * [`partial_bell`], [`complete_exp_bell`] and [`series_power_c`] evaluate
//!   the Bell and power-series-power polynomials over any [`Ring`], including
//!   the symbolic [`Polynomial`] used to print monomial listings.
//!
//! Partial Bell polynomials use the classical indexing: `B_{j,l}` is
//! homogeneous of degree `l`, so `B_{4,2} = 4 x1 x3 + 3 x2^2`. In terms of the
//! tuple sets above, `B_{j,l}` sums over `P(j, j − l + 1)`: the tuple length is
//! `j − l + 1` and its entries add up to `l`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{factorial, ExactRational, Ring, Scalar};

/// Multiplicity tuple `(n_1, …, n_l)` of an integer partition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionTuple(pub Vec<u32>);

/// Ordered tuple of strictly positive parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompositionTuple(pub Vec<u32>);

impl PartitionTuple {
    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of parts, `n_1 + … + n_l`.
    pub fn part_count(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }

    /// Weighted sum `n_1 + 2 n_2 + … + l n_l`.
    pub fn weight(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &n)| (i as u64 + 1) * n as u64)
            .sum()
    }

    /// Membership in `P(j, l)` with `l` the tuple length.
    pub fn is_member(&self, j: usize) -> bool {
        let l = self.len();
        if l == 0 {
            return j == 0;
        }
        l <= j && self.weight() == j as u64 && self.part_count() == (j - l + 1) as u64
    }
}

impl CompositionTuple {
    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_member(&self, m: usize, r: usize) -> bool {
        self.0.len() == r
            && self.0.iter().all(|&n| n >= 1)
            && self.0.iter().map(|&n| n as u64).sum::<u64>() == m as u64
    }
}

/// All tuples of `P(j, l)` in lexicographic ascending order.
///
/// `(0, 0)` yields the single empty tuple; any other out-of-range request
/// yields an empty list.
pub fn enumerate_partitions(j: usize, l: usize) -> Vec<PartitionTuple> {
    if l == 0 {
        return if j == 0 {
            vec![PartitionTuple(Vec::new())]
        } else {
            Vec::new()
        };
    }
    if l > j {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; l];
    fill_partition(0, j - l + 1, j, &mut current, &mut out);
    out
}

fn fill_partition(
    pos: usize,
    count: usize,
    weight: usize,
    current: &mut [u32],
    out: &mut Vec<PartitionTuple>,
) {
    let l = current.len();
    if pos == l {
        if count == 0 && weight == 0 {
            out.push(PartitionTuple(current.to_vec()));
        }
        return;
    }
    let part = pos + 1;
    // Remaining slots have part sizes > `part`, so they need at least
    // `part + 1` weight per unit of count.
    let max_n = count.min(weight / part);
    for n in 0..=max_n {
        let rest_count = count - n;
        let rest_weight = weight - n * part;
        if pos + 1 == l {
            if rest_count != 0 || rest_weight != 0 {
                continue;
            }
        } else if rest_weight < rest_count * (part + 1) || rest_weight > rest_count * l {
            continue;
        }
        current[pos] = n as u32;
        fill_partition(pos + 1, rest_count, rest_weight, current, out);
    }
    current[pos] = 0;
}

/// All compositions of `m` into `r` positive parts, lexicographic ascending.
pub fn enumerate_compositions(m: usize, r: usize) -> Vec<CompositionTuple> {
    if r == 0 {
        return if m == 0 {
            vec![CompositionTuple(Vec::new())]
        } else {
            Vec::new()
        };
    }
    if r > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; r];
    fill_composition(0, m, &mut current, &mut out);
    out
}

fn fill_composition(
    pos: usize,
    remaining: usize,
    current: &mut [u32],
    out: &mut Vec<CompositionTuple>,
) {
    let r = current.len();
    if pos + 1 == r {
        current[pos] = remaining as u32;
        out.push(CompositionTuple(current.to_vec()));
        return;
    }
    let slots_after = r - pos - 1;
    for n in 1..=(remaining - slots_after) {
        current[pos] = n as u32;
        fill_composition(pos + 1, remaining - n, current, out);
    }
}

/// `c(j; n) = j! / Π_i (i!)^{n_i} n_i!`.
pub fn multinomial_c(j: usize, n: &PartitionTuple) -> Result<ExactRational> {
    if !n.is_member(j) {
        return Err(Error::InvalidTuple {
            j,
            tuple: n.0.clone(),
        });
    }
    Ok(BigRational::from_integer(multinomial_integer(
        j,
        n.entries(),
    )))
}

fn multinomial_integer(j: usize, n: &[u32]) -> BigInt {
    let mut den = BigInt::one();
    for (i, &ni) in n.iter().enumerate() {
        let fi = factorial(i + 1);
        den *= num_traits::pow(fi, ni as usize) * factorial(ni as usize);
    }
    factorial(j) / den
}

fn check_len(needed: usize, got: usize) -> Result<()> {
    if got < needed {
        Err(Error::ShortInput { needed, got })
    } else {
        Ok(())
    }
}

/// Partial Bell polynomial `B_{j,l}(x_1, …, x_{j−l+1})`; `x[0]` holds `x_1`.
pub fn partial_bell<T: Ring>(j: usize, l: usize, x: &[T]) -> Result<T> {
    if l == 0 {
        return Ok(if j == 0 { T::one() } else { T::zero() });
    }
    if l > j {
        return Ok(T::zero());
    }
    let width = j - l + 1;
    check_len(width, x.len())?;
    let mut acc = T::zero();
    for tuple in enumerate_partitions(j, width) {
        let mut term = T::from_integer(&multinomial_integer(j, tuple.entries()));
        for (i, &ni) in tuple.entries().iter().enumerate() {
            if ni > 0 {
                term = term * x[i].pow_u32(ni);
            }
        }
        acc = acc + term;
    }
    Ok(acc)
}

/// Complete exponential Bell polynomial `B_j = Σ_{l=1}^{j} B_{j,l}`, with `B_0 = 1`.
pub fn complete_exp_bell<T: Ring>(j: usize, x: &[T]) -> Result<T> {
    if j == 0 {
        return Ok(T::one());
    }
    check_len(j, x.len())?;
    let mut acc = T::zero();
    for l in 1..=j {
        acc = acc + partial_bell(j, l, x)?;
    }
    Ok(acc)
}

/// Coefficient of `t^m` in `(x_1 t + x_2 t^2 + …)^r`, by the recursion
/// `C_{m,r} = Σ_{i=r−1}^{m−1} x_{m−i} C_{i,r−1}` with `C_{0,0} = 1`.
pub fn series_power_c<T: Ring>(m: usize, r: usize, x: &[T]) -> Result<T> {
    if r > m {
        return Ok(T::zero());
    }
    if r == 0 {
        return Ok(if m == 0 { T::one() } else { T::zero() });
    }
    check_len(m - r + 1, x.len())?;
    Ok(series_power_table(m, r, x).swap_remove(r).swap_remove(m))
}

/// Full table `table[r][m] = C_{m,r}` for all `r ≤ max_r`, `m ≤ max_m`.
///
/// Entries needing `x_i` beyond `x.len()` are computed as if those were zero.
pub fn series_power_table<T: Ring>(max_m: usize, max_r: usize, x: &[T]) -> Vec<Vec<T>> {
    let mut table: Vec<Vec<T>> = Vec::with_capacity(max_r + 1);
    let mut row0 = vec![T::zero(); max_m + 1];
    row0[0] = T::one();
    table.push(row0);
    for r in 1..=max_r {
        let mut row = vec![T::zero(); max_m + 1];
        for m in r..=max_m {
            let mut acc = T::zero();
            for i in (r - 1)..m {
                let idx = m - i;
                if idx <= x.len() {
                    let prev = &table[r - 1][i];
                    if *prev != T::zero() {
                        acc = acc + x[idx - 1].clone() * prev.clone();
                    }
                }
            }
            row[m] = acc;
        }
        table.push(row);
    }
    table
}

/// Generalized binomial `α (α−1) ⋯ (α−r+1) / r!`.
pub fn gen_binomial<T: Scalar>(alpha: &T, r: usize) -> T {
    let mut acc = T::one();
    for i in 0..r {
        acc = acc * (alpha.clone() - T::from_i64(i as i64)) / T::from_i64(i as i64 + 1);
    }
    acc
}

/// Sparse multivariate polynomial with rational coefficients in `x1, x2, …`.
///
/// Exponent vectors carry no trailing zeros, so equal polynomials compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Polynomial {
    /// The variable `x_index` (1-based).
    pub fn var(index: usize) -> Self {
        assert!(index >= 1, "variables are 1-based");
        let mut exps = vec![0u32; index];
        exps[index - 1] = 1;
        Self::monomial(BigRational::one(), exps)
    }

    /// Variables `x_1, …, x_n`.
    pub fn vars(n: usize) -> Vec<Self> {
        (1..=n).map(Self::var).collect()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, Vec::new())
    }

    pub fn monomial(coeff: BigRational, mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Evaluate at a point; `point[0]` is `x1`.
    pub fn eval<T: Scalar>(&self, point: &[T]) -> T {
        let mut acc = T::zero();
        for (exps, c) in &self.terms {
            let mut term = T::from_integer(c.numer()) / T::from_integer(c.denom());
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term = term * point[i].pow_u32(e);
                }
            }
            acc = acc + term;
        }
        acc
    }

    fn insert_add(&mut self, exps: Vec<u32>, coeff: BigRational) {
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                if !coeff.is_zero() {
                    v.insert(coeff);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }
}

impl Add for Polynomial {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.insert_add(e, c);
        }
        self
    }
}

impl Neg for Polynomial {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for Polynomial {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for Polynomial {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Polynomial::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let n = ea.len().max(eb.len());
                let exps: Vec<u32> = (0..n)
                    .map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0))
                    .collect();
                out.insert_add(exps, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl Zero for Polynomial {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Polynomial {
    fn one() -> Self {
        Self::constant(BigRational::one())
    }
}

impl Ring for Polynomial {
    fn from_integer(n: &BigInt) -> Self {
        Self::constant(BigRational::from_integer(n.clone()))
    }
}

/// Terms are printed by descending exponent vector, e.g. `3*x1^2*x4 + 6*x1*x2*x3 + x2^3`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (exps, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            let factors: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            let coeff = if mag.is_integer() {
                mag.numer().to_string()
            } else {
                format!("{}/{}", mag.numer(), mag.denom())
            };
            if factors.is_empty() {
                write!(f, "{coeff}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", coeff, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[u32]) -> PartitionTuple {
        PartitionTuple(v.to_vec())
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn small_partition_sets() {
        assert_eq!(enumerate_partitions(3, 2), vec![pt(&[1, 1])]);
        assert_eq!(enumerate_partitions(4, 2), vec![pt(&[2, 1])]);
        assert_eq!(enumerate_partitions(5, 1), vec![pt(&[5])]);
        assert_eq!(enumerate_partitions(0, 0), vec![pt(&[])]);
        assert!(enumerate_partitions(3, 0).is_empty());
        assert!(enumerate_partitions(2, 3).is_empty());
        // longest tuples are single parts of size j
        assert_eq!(enumerate_partitions(3, 3), vec![pt(&[0, 0, 1])]);
    }

    #[test]
    fn partitions_are_exhaustive() {
        for j in 0..=12usize {
            for l in 0..=j {
                let got = enumerate_partitions(j, l);
                let mut brute = Vec::new();
                if l == 0 {
                    if j == 0 {
                        brute.push(pt(&[]));
                    }
                } else {
                    // Entries with n_i > j / i already overshoot the weighted sum,
                    // so this box contains every candidate in {0..j}^l.
                    let bounds: Vec<u32> = (1..=l).map(|i| (j / i) as u32).collect();
                    let mut idx = vec![0u32; l];
                    'scan: loop {
                        let t = pt(&idx);
                        if t.is_member(j) {
                            brute.push(t);
                        }
                        let mut p = l;
                        loop {
                            if p == 0 {
                                break 'scan;
                            }
                            p -= 1;
                            if idx[p] < bounds[p] {
                                idx[p] += 1;
                                break;
                            }
                            idx[p] = 0;
                        }
                    }
                }
                assert_eq!(got, brute, "j={j} l={l}");
            }
        }
    }

    #[test]
    fn compositions() {
        let c = |v: &[u32]| CompositionTuple(v.to_vec());
        assert_eq!(enumerate_compositions(3, 2), vec![c(&[1, 2]), c(&[2, 1])]);
        assert_eq!(enumerate_compositions(4, 1), vec![c(&[4])]);
        assert!(enumerate_compositions(2, 3).is_empty());
        assert!(enumerate_compositions(2, 0).is_empty());
        assert_eq!(enumerate_compositions(0, 0), vec![c(&[])]);
        // 2^{m-1} compositions in total
        let total: usize = (1..=7).map(|r| enumerate_compositions(7, r).len()).sum();
        assert_eq!(total, 64);
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial_c(3, &pt(&[1, 1])).unwrap(), q(3, 1));
        assert_eq!(multinomial_c(1, &pt(&[1])).unwrap(), q(1, 1));
        assert_eq!(multinomial_c(4, &pt(&[2, 1])).unwrap(), q(6, 1));
        assert!(multinomial_c(4, &pt(&[1, 1])).is_err());
        assert!(matches!(
            multinomial_c(3, &pt(&[3, 0])),
            Err(Error::InvalidTuple { .. })
        ));
    }

    #[test]
    fn partial_bell_symbolic() {
        let x = Polynomial::vars(6);
        let b32 = partial_bell(3, 2, &x).unwrap();
        assert_eq!(b32, Polynomial::monomial(q(3, 1), vec![1, 1]));
        let b42 = partial_bell(4, 2, &x).unwrap();
        let expect = Polynomial::monomial(q(4, 1), vec![1, 0, 1])
            + Polynomial::monomial(q(3, 1), vec![0, 2]);
        assert_eq!(b42, expect);
        for j in 1..=6 {
            assert_eq!(partial_bell(j, 1, &x).unwrap(), Polynomial::var(j));
        }
        assert!(partial_bell(4, 2, &x[..2]).is_err());
    }

    #[test]
    fn complete_bell_symbolic() {
        let x = Polynomial::vars(4);
        let b3 = complete_exp_bell(3, &x).unwrap();
        let expect = Polynomial::monomial(q(1, 1), vec![3])
            + Polynomial::monomial(q(3, 1), vec![1, 1])
            + Polynomial::var(3);
        assert_eq!(b3, expect);
        assert_eq!(complete_exp_bell::<f64>(0, &[]).unwrap(), 1.0);
        let ones = vec![BigRational::one(); 4];
        let vals: Vec<_> = (1..=4)
            .map(|j| complete_exp_bell(j, &ones).unwrap())
            .collect();
        assert_eq!(vals, vec![q(1, 1), q(2, 1), q(5, 1), q(15, 1)]);
    }

    #[test]
    fn power_series_polynomials() {
        let x = Polynomial::vars(6);
        for m in 1..=6 {
            assert_eq!(series_power_c(m, 1, &x).unwrap(), Polynomial::var(m));
        }
        let c63 = series_power_c(6, 3, &x).unwrap();
        let expect = Polynomial::monomial(q(6, 1), vec![1, 1, 1])
            + Polynomial::monomial(q(3, 1), vec![2, 0, 0, 1])
            + Polynomial::monomial(q(1, 1), vec![0, 3]);
        assert_eq!(c63, expect);
        assert_eq!(c63.to_string(), "3*x1^2*x4 + 6*x1*x2*x3 + x2^3");
        assert_eq!(
            series_power_c(3, 2, &x).unwrap(),
            Polynomial::monomial(q(2, 1), vec![1, 1])
        );
        assert_eq!(series_power_c(2, 3, &x).unwrap(), Polynomial::zero());
        assert_eq!(series_power_c::<f64>(0, 0, &[]).unwrap(), 1.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(gen_binomial(&q(-1, 2), 1), q(-1, 2));
        assert_eq!(gen_binomial(&q(7, 3), 0), q(1, 1));
        assert_eq!(gen_binomial(&q(-3, 2), 2), q(15, 8));
        assert_eq!(gen_binomial(&q(5, 1), 2), q(10, 1));
        assert_eq!(gen_binomial(&-1.5f64, 2), 1.875);
    }

    #[test]
    fn polynomial_display() {
        let p = Polynomial::monomial(q(-1, 2), vec![0, 1]) + Polynomial::constant(q(3, 1));
        assert_eq!(p.to_string(), "-1/2*x2 + 3");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }
}
