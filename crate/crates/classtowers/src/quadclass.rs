//! Class groups of imaginary quadratic fields via binary quadratic forms.
//!
//! Forms (a, b, c) of discriminant D = b^2 - 4ac < 0 with a > 0 represent the
//! ideal classes of the order of discriminant D; only primitive forms are
//! enumerated. Composition is classical Gauss/Dirichlet composition through
//! united forms: the second operand is replaced by an equivalent form whose
//! leading coefficient is coprime to the first, the middle coefficients are
//! aligned by a CRT step, and the product is reduced.
//!
//! Everything here stays well inside i64 because the survey only ever needs
//! |D| < 10^7.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadError {
    #[error("form ({0}, {1}, {2}) is not positive definite")]
    NotPositiveDefinite(i64, i64, i64),
    #[error("invalid discriminant {0}: need D < 0 and D congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),
    #[error("mismatched discriminants {0} and {1}")]
    MismatchedDiscriminants(i64, i64),
    #[error("invalid field radicand {0}: need a negative squarefree integer")]
    InvalidRadicand(i64),
}

/// Integral binary quadratic form a x^2 + b xy + c y^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g.
fn extgcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, x, y) = extgcd(b, a % b);
    (g, y, x - (a / b) * y)
}

impl BinaryForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BinaryForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.discriminant() < 0
    }

    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.a, self.b), self.c) == 1
    }

    /// |b| <= a <= c, with b >= 0 when |b| = a or a = c.
    pub fn is_reduced(&self) -> bool {
        self.b.abs() <= self.a
            && self.a <= self.c
            && !((self.b.abs() == self.a || self.a == self.c) && self.b < 0)
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// The inverse class is represented by the mirror form.
    pub fn inverse(&self) -> BinaryForm {
        reduce(BinaryForm::new(self.a, -self.b, self.c)).expect("mirror stays definite")
    }
}

fn validate_discriminant(d: i64) -> Result<(), QuadError> {
    if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(QuadError::InvalidDiscriminant(d));
    }
    Ok(())
}

/// Principal (identity) form of discriminant D.
pub fn principal_form(d: i64) -> Result<BinaryForm, QuadError> {
    validate_discriminant(d)?;
    let b = d.rem_euclid(2);
    Ok(BinaryForm::new(1, b, (b * b - d) / 4))
}

/// The unique reduced form equivalent to f.
pub fn reduce(f: BinaryForm) -> Result<BinaryForm, QuadError> {
    if !f.is_positive_definite() {
        return Err(QuadError::NotPositiveDefinite(f.a, f.b, f.c));
    }
    let d = f.discriminant();
    let (mut a, mut b, mut c) = (f.a, f.b, f.c);
    loop {
        // Normalize b into (-a, a].
        if b > a || b <= -a {
            let k = (a - b).div_euclid(2 * a);
            b += 2 * a * k;
            c = (b * b - d) / (4 * a);
        }
        if a > c {
            // Swap outer coefficients; flips the sign of b.
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
    }
    let out = BinaryForm::new(a, b, c);
    debug_assert!(out.is_reduced() && out.discriminant() == d);
    Ok(out)
}

/// All primitive reduced forms of discriminant D, sorted; the length is the
/// class number h(D).
pub fn reduced_forms(d: i64) -> Result<Vec<BinaryForm>, QuadError> {
    validate_discriminant(d)?;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        let mut b = -a + 1 + (d.rem_euclid(2) + a + 1) % 2;
        // b runs over (-a, a] with b = D mod 2
        while b <= a {
            let num = b * b - d;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                let f = BinaryForm::new(a, b, c);
                if f.is_reduced() && f.is_primitive() {
                    out.push(f);
                }
            }
            b += 2;
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

/// Class number h(D) = number of primitive reduced forms.
pub fn class_number(d: i64) -> Result<u64, QuadError> {
    Ok(reduced_forms(d)?.len() as u64)
}

/// Replace g by a properly equivalent form whose leading coefficient is
/// coprime to m. A primitive positive definite form always primitively
/// represents such a value.
fn with_leading_coprime_to(g: BinaryForm, m: i64) -> BinaryForm {
    if gcd(g.a, m) == 1 {
        return g;
    }
    for s in 1..=(2 * m.abs() + 16) {
        for x in -s..=s {
            for y in [-s, s] {
                for (x, y) in [(x, y), (y, x)] {
                    if gcd(x, y) != 1 || gcd(g.eval(x, y), m) != 1 {
                        continue;
                    }
                    // Complete (x, y) to a determinant-1 matrix [[x, u], [y, v]].
                    let (_, p, q) = extgcd(x, y);
                    let (u, v) = (-q, p);
                    let a2 = g.eval(x, y);
                    let c2 = g.eval(u, v);
                    let b2 = 2 * g.a * x * u + g.b * (x * v + u * y) + 2 * g.c * y * v;
                    let out = BinaryForm::new(a2, b2, c2);
                    debug_assert_eq!(out.discriminant(), g.discriminant());
                    return out;
                }
            }
        }
    }
    unreachable!("primitive form represents values coprime to {}", m)
}

/// x = r1 mod m1, x = r2 mod m2 for even moduli with gcd dividing r2 - r1.
fn crt(r1: i64, m1: i64, r2: i64, m2: i64) -> i64 {
    let (g, p, _) = extgcd(m1, m2);
    debug_assert_eq!((r2 - r1).rem_euclid(g), 0);
    let lcm = m1 / g * m2;
    let t = ((r2 - r1) / g) as i128 * p as i128 % (m2 / g) as i128;
    let x = (r1 as i128 + m1 as i128 * t).rem_euclid(lcm as i128);
    x as i64
}

/// Gauss composition of the classes of f and g; reduced representative.
pub fn compose(f: BinaryForm, g: BinaryForm) -> Result<BinaryForm, QuadError> {
    let d = f.discriminant();
    if g.discriminant() != d {
        return Err(QuadError::MismatchedDiscriminants(d, g.discriminant()));
    }
    let f = reduce(f)?;
    let g = reduce(g)?;
    let g = with_leading_coprime_to(g, f.a);
    // United forms: common middle coefficient B makes (f.a, B, g.a*C) and
    // (g.a, B, f.a*C) concordant with product (f.a*g.a, B, C).
    let b = crt(f.b, 2 * f.a, g.b, 2 * g.a);
    let a3 = f.a * g.a;
    let c3 = ((b as i128 * b as i128 - d as i128) / (4 * a3 as i128)) as i64;
    reduce(BinaryForm::new(a3, b, c3))
}

/// Repeated composition.
pub fn class_pow(f: BinaryForm, e: u64) -> Result<BinaryForm, QuadError> {
    let mut base = reduce(f)?;
    let mut acc = principal_form(f.discriminant())?;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = compose(acc, base)?;
        }
        base = compose(base, base)?;
        e >>= 1;
    }
    Ok(acc)
}

/// Order of the class of f in the class group.
pub fn class_order(f: BinaryForm) -> Result<u64, QuadError> {
    let id = principal_form(f.discriminant())?;
    let f = reduce(f)?;
    let mut acc = f;
    let mut n = 1;
    while acc != id {
        acc = compose(acc, f)?;
        n += 1;
    }
    Ok(n)
}

/// Class group of discriminant D with its invariant factor decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroupStructure {
    pub discriminant: i64,
    pub order: u64,
    /// Descending cyclic orders, each dividing its predecessor, product = order.
    /// Empty for the trivial group.
    pub invariants: Vec<u64>,
}

/// Full composition table over the reduced forms of discriminant D.
pub struct CayleyTable {
    pub forms: Vec<BinaryForm>,
    pub identity: usize,
    pub table: Vec<Vec<usize>>,
}

pub fn cayley_table(d: i64) -> Result<CayleyTable, QuadError> {
    let forms = reduced_forms(d)?;
    let index: HashMap<BinaryForm, usize> =
        forms.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let identity = index[&principal_form(d)?];
    let h = forms.len();
    let mut table = vec![vec![0usize; h]; h];
    for i in 0..h {
        for j in i..h {
            let prod = compose(forms[i], forms[j])?;
            let k = *index
                .get(&prod)
                .expect("composition lands on a reduced form of the same discriminant");
            table[i][j] = k;
            table[j][i] = k; // composition is commutative
        }
    }
    Ok(CayleyTable {
        forms,
        identity,
        table,
    })
}

impl CayleyTable {
    pub fn pow(&self, x: usize, e: u64) -> usize {
        let mut acc = self.identity;
        let mut base = x;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.table[acc][base];
            }
            base = self.table[base][base];
            e >>= 1;
        }
        acc
    }
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Structure of the class group, computed by order counting on the Cayley
/// table: for each prime p the counts #\{x : x^(p^j) = 1\} determine the
/// p-primary invariants as a conjugate partition.
pub fn class_group(d: i64) -> Result<ClassGroupStructure, QuadError> {
    let t = cayley_table(d)?;
    let h = t.forms.len() as u64;
    // exponent partitions per prime
    let mut per_prime: Vec<(u64, Vec<u32>)> = Vec::new();
    for (p, k) in factorize(h) {
        let mut s_prev = 0u32;
        let mut conj = Vec::new(); // conj[j-1] = #invariants with exponent >= j
        for j in 1..=k {
            let pj = p.pow(j);
            let count = (0..t.forms.len())
                .filter(|&x| t.pow(x, pj) == t.identity)
                .count() as u64;
            let mut s = 0u32;
            let mut c = count;
            while c > 1 {
                debug_assert_eq!(c % p, 0);
                c /= p;
                s += 1;
            }
            if s == s_prev {
                break;
            }
            conj.push(s - s_prev);
            s_prev = s;
        }
        let rank = *conj.first().unwrap_or(&0);
        let exps: Vec<u32> = (1..=rank)
            .map(|i| conj.iter().filter(|&&c| c >= i).count() as u32)
            .collect();
        per_prime.push((p, exps));
    }
    let rank = per_prime.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
    let mut invariants = Vec::with_capacity(rank);
    for i in 0..rank {
        let mut inv = 1u64;
        for (p, exps) in &per_prime {
            if let Some(&e) = exps.get(i) {
                inv *= p.pow(e);
            }
        }
        invariants.push(inv);
    }
    debug_assert_eq!(invariants.iter().product::<u64>().max(1), h);
    Ok(ClassGroupStructure {
        discriminant: d,
        order: h,
        invariants,
    })
}

/// Field discriminant of Q(sqrt(r)) for a negative squarefree radicand r.
pub fn field_discriminant(r: i64) -> Result<i64, QuadError> {
    if r >= 0 {
        return Err(QuadError::InvalidRadicand(r));
    }
    let fs = crate::arith::trial_factor((-r) as u64);
    if fs.iter().any(|&(_, e)| e > 1) {
        return Err(QuadError::InvalidRadicand(r));
    }
    Ok(if r.rem_euclid(4) == 1 { r } else { 4 * r })
}

/// 2-part of the class number of Q(sqrt(r)), r a negative squarefree radicand.
pub fn two_class_number(r: i64) -> Result<u64, QuadError> {
    let d = field_discriminant(r)?;
    let mut h = class_number(d)?;
    let mut two_part = 1;
    while h % 2 == 0 {
        h /= 2;
        two_part *= 2;
    }
    Ok(two_part)
}
