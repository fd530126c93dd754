//! Finite symbol expansions and their text record.
//!
//! A symbol is a list of orders `f_0, f_1, ...`; the full symbol at
//! semiclassical parameter `N` is `sum_j N^-j f_j`. On the torus each order is
//! a finite Fourier series `sum c_{m,n} e^{2πi(m x + n ξ)}`; on the sphere it is
//! a polynomial `sum c_{a,b,c} x1^a x2^b x3^c` restricted to `|x| = 1`.
//!
//! Record format, one directive per line (`;` also separates lines, `#`
//! starts a comment):
//!
//! ```text
//! symbol sphere
//! term 0 1 0 1 0        # exponents (a b c), then re, im
//! term 1 0 0 0 1
//! order 1               # following terms belong to f_1
//! term 0 0 1 0.5 0
//! ```
//!
//! Torus terms carry two integer exponents `(m n)`. Coefficients are written
//! with the shortest round-trip representation, so format/parse is lossless.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_complex::Complex64;

use super::{ManifoldPoint, SpaceKind};
use crate::error::{Error, Result};

/// Distance from the unit sphere tolerated by symbol evaluation.
pub const SPHERE_TOLERANCE: f64 = 1e-12;

/// Basis function index for one phase space.
pub trait BasisKey: Copy + Ord + fmt::Debug {
    const KIND: SpaceKind;
    fn identity() -> Self;
    fn product(self, other: Self) -> Self;
    fn eval(self, p: &ManifoldPoint) -> Result<Complex64>;
    /// Key of the complex-conjugate basis function.
    fn conjugate(self) -> Self;
    fn degree(self) -> u32;
    fn write_exponents(self, out: &mut String);
    fn parse_exponents(fields: &[&str]) -> std::result::Result<Self, String>;
    const ARITY: usize;
}

/// Torus Fourier mode `e^{2πi(m x + n ξ)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FourierMode {
    pub m: i32,
    pub n: i32,
}

/// Sphere monomial `x1^a x2^b x3^c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl FourierMode {
    pub fn new(m: i32, n: i32) -> Self {
        Self { m, n }
    }
}

impl Monomial {
    pub fn new(a: u32, b: u32, c: u32) -> Self {
        Self { a, b, c }
    }
}

impl BasisKey for FourierMode {
    const KIND: SpaceKind = SpaceKind::Torus;
    const ARITY: usize = 2;

    fn identity() -> Self {
        Self::new(0, 0)
    }

    fn product(self, other: Self) -> Self {
        Self::new(self.m + other.m, self.n + other.n)
    }

    fn eval(self, p: &ManifoldPoint) -> Result<Complex64> {
        match *p {
            ManifoldPoint::Torus { x, xi } => {
                if !(x.is_finite() && xi.is_finite()) {
                    return Err(Error::Domain(format!("torus point ({x}, {xi})")));
                }
                Ok(Complex64::from_polar(1.0, TAU * (self.m as f64 * x + self.n as f64 * xi)))
            }
            ManifoldPoint::Sphere(_) => Err(Error::KindMismatch { expected: "torus" }),
        }
    }

    fn conjugate(self) -> Self {
        Self::new(-self.m, -self.n)
    }

    fn degree(self) -> u32 {
        self.m.unsigned_abs().max(self.n.unsigned_abs())
    }

    fn write_exponents(self, out: &mut String) {
        let _ = write!(out, "{} {}", self.m, self.n);
    }

    fn parse_exponents(fields: &[&str]) -> std::result::Result<Self, String> {
        let m = fields[0].parse::<i32>().map_err(|e| format!("mode index {:?}: {e}", fields[0]))?;
        let n = fields[1].parse::<i32>().map_err(|e| format!("mode index {:?}: {e}", fields[1]))?;
        // Keep products of parsed symbols from overflowing.
        if m.unsigned_abs() > 1 << 20 || n.unsigned_abs() > 1 << 20 {
            return Err(format!("mode ({m}, {n}) out of range"));
        }
        Ok(Self::new(m, n))
    }
}

impl BasisKey for Monomial {
    const KIND: SpaceKind = SpaceKind::Sphere;
    const ARITY: usize = 3;

    fn identity() -> Self {
        Self::new(0, 0, 0)
    }

    fn product(self, other: Self) -> Self {
        Self::new(self.a + other.a, self.b + other.b, self.c + other.c)
    }

    fn eval(self, p: &ManifoldPoint) -> Result<Complex64> {
        match *p {
            ManifoldPoint::Sphere(x) => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                if !r2.is_finite() || (r2 - 1.0).abs() > SPHERE_TOLERANCE {
                    return Err(Error::Domain(format!("|x|^2 = {r2} for sphere point {x:?}")));
                }
                Ok(Complex64::new(
                    x[0].powi(self.a as i32) * x[1].powi(self.b as i32) * x[2].powi(self.c as i32),
                    0.0,
                ))
            }
            ManifoldPoint::Torus { .. } => Err(Error::KindMismatch { expected: "sphere" }),
        }
    }

    fn conjugate(self) -> Self {
        self
    }

    fn degree(self) -> u32 {
        self.a + self.b + self.c
    }

    fn write_exponents(self, out: &mut String) {
        let _ = write!(out, "{} {} {}", self.a, self.b, self.c);
    }

    fn parse_exponents(fields: &[&str]) -> std::result::Result<Self, String> {
        let mut e = [0u32; 3];
        for (slot, f) in e.iter_mut().zip(fields) {
            *slot = f.parse::<u32>().map_err(|err| format!("exponent {f:?}: {err}"))?;
            if *slot > 4096 {
                return Err(format!("exponent {slot} out of range"));
            }
        }
        Ok(Self::new(e[0], e[1], e[2]))
    }
}

/// A finite symbol `sum_j N^-j f_j` in the basis `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol<K: BasisKey> {
    orders: Vec<BTreeMap<K, Complex64>>,
}

impl<K: BasisKey> Default for Symbol<K> {
    fn default() -> Self {
        Self { orders: vec![BTreeMap::new()] }
    }
}

impl<K: BasisKey> Symbol<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms([(K::identity(), c)])
    }

    /// Principal symbol from `(key, coefficient)` pairs; repeated keys add.
    pub fn from_terms(terms: impl IntoIterator<Item = (K, Complex64)>) -> Self {
        let mut s = Self::zero();
        for (k, c) in terms {
            s.add_term(0, k, c);
        }
        s
    }

    pub fn add_term(&mut self, order: usize, key: K, c: Complex64) {
        if self.orders.len() <= order {
            self.orders.resize_with(order + 1, BTreeMap::new);
        }
        *self.orders[order].entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    /// Attach `f_j` (coefficient `N^-j`) to the expansion.
    pub fn with_correction(mut self, order: usize, correction: &Symbol<K>) -> Self {
        for (k, c) in correction.principal_terms() {
            self.add_term(order, *k, *c);
        }
        self
    }

    pub fn orders(&self) -> &[BTreeMap<K, Complex64>] {
        &self.orders
    }

    pub fn principal_terms(&self) -> &BTreeMap<K, Complex64> {
        &self.orders[0]
    }

    pub fn principal(&self) -> Self {
        Self { orders: vec![self.orders[0].clone()] }
    }

    pub fn has_corrections(&self) -> bool {
        self.orders[1..].iter().any(|o| !o.is_empty())
    }

    /// Collapse the expansion at a fixed `N` into a single order.
    pub fn at_n(&self, n: usize) -> Self {
        let mut out = Self::zero();
        for (j, order) in self.orders.iter().enumerate() {
            let w = (n as f64).powi(-(j as i32));
            for (k, c) in order {
                out.add_term(0, *k, c * w);
            }
        }
        out
    }

    pub fn eval_principal(&self, p: &ManifoldPoint) -> Result<Complex64> {
        eval_order(&self.orders[0], p)
    }

    /// Full symbol at semiclassical parameter `n`.
    pub fn eval(&self, p: &ManifoldPoint, n: usize) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, order) in self.orders.iter().enumerate() {
            acc += eval_order(order, p)? * (n as f64).powi(-(j as i32));
        }
        Ok(acc)
    }

    /// Largest basis degree over all orders.
    pub fn degree(&self) -> u32 {
        self.orders.iter().flat_map(|o| o.keys()).map(|k| k.degree()).max().unwrap_or(0)
    }

    /// Sum of coefficient magnitudes: an upper bound for `sup |f|` when the
    /// basis functions are bounded by one.
    pub fn coefficient_l1(&self) -> f64 {
        self.orders[0].values().map(|c| c.norm()).sum()
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (j, order) in self.orders.iter().enumerate() {
            for (k, c) in order {
                out.add_term(j, k.conjugate(), c.conj());
            }
        }
        out
    }

    /// True when every order is real-valued as a function.
    pub fn is_real(&self) -> bool {
        let conj = self.conj();
        self.orders.iter().enumerate().all(|(j, order)| {
            let other = conj.orders.get(j);
            let keys = order.keys().chain(other.into_iter().flat_map(|o| o.keys()));
            keys.into_iter().all(|k| {
                let a = order.get(k).copied().unwrap_or_default();
                let b = other.and_then(|o| o.get(k)).copied().unwrap_or_default();
                (a - b).norm() <= 1e-15 * (1.0 + a.norm())
            })
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { orders: self.orders.iter().map(|o| o.iter().map(|(k, c)| (*k, c * s)).collect()).collect() }
    }

    /// Integer power of the symbol.
    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(Complex64::new(1.0, 0.0));
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// `sum_k coeffs[k] f^k` (coefficients in increasing degree).
    pub fn compose_polynomial(&self, coeffs: &[f64]) -> Self {
        // Horner keeps the number of symbol products at deg(p).
        let mut out = Self::zero();
        for &c in coeffs.iter().rev() {
            out = &(&out * self) + &Self::constant(Complex64::new(c, 0.0));
        }
        out
    }

    pub fn to_record(&self) -> String {
        let mut out = format!("symbol {}\n", K::KIND);
        for (j, order) in self.orders.iter().enumerate() {
            if j > 0 {
                if order.is_empty() {
                    continue;
                }
                let _ = writeln!(out, "order {j}");
            }
            for (k, c) in order {
                out.push_str("term ");
                k.write_exponents(&mut out);
                let _ = writeln!(out, " {:?} {:?}", c.re, c.im);
            }
        }
        out
    }
}

fn eval_order<K: BasisKey>(order: &BTreeMap<K, Complex64>, p: &ManifoldPoint) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in order {
        acc += c * k.eval(p)?;
    }
    if order.is_empty() {
        // Still validate the point.
        K::identity().eval(p)?;
    }
    Ok(acc)
}

impl<K: BasisKey> Add for &Symbol<K> {
    type Output = Symbol<K>;

    fn add(self, rhs: &Symbol<K>) -> Symbol<K> {
        let mut out = self.clone();
        for (j, order) in rhs.orders.iter().enumerate() {
            for (k, c) in order {
                out.add_term(j, *k, *c);
            }
        }
        out
    }
}

/// Cauchy product in the order index, basis product within.
impl<K: BasisKey> Mul for &Symbol<K> {
    type Output = Symbol<K>;

    fn mul(self, rhs: &Symbol<K>) -> Symbol<K> {
        let mut out = Symbol::zero();
        for (i, a) in self.orders.iter().enumerate() {
            for (j, b) in rhs.orders.iter().enumerate() {
                for (ka, ca) in a {
                    for (kb, cb) in b {
                        out.add_term(i + j, ka.product(*kb), ca * cb);
                    }
                }
            }
        }
        out
    }
}

/// A symbol on either phase space.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolSpec {
    Torus(Symbol<FourierMode>),
    Sphere(Symbol<Monomial>),
}

impl SymbolSpec {
    pub fn kind(&self) -> SpaceKind {
        match self {
            SymbolSpec::Torus(_) => SpaceKind::Torus,
            SymbolSpec::Sphere(_) => SpaceKind::Sphere,
        }
    }

    pub fn constant(kind: SpaceKind, c: Complex64) -> Self {
        match kind {
            SpaceKind::Torus => SymbolSpec::Torus(Symbol::constant(c)),
            SpaceKind::Sphere => SymbolSpec::Sphere(Symbol::constant(c)),
        }
    }

    /// `cos(2πx) + i cos(2πξ)`, the Scottish flag symbol.
    pub fn scottish_flag() -> Self {
        let h = Complex64::new(0.5, 0.0);
        let ih = Complex64::new(0.0, 0.5);
        SymbolSpec::Torus(Symbol::from_terms([
            (FourierMode::new(1, 0), h),
            (FourierMode::new(-1, 0), h),
            (FourierMode::new(0, 1), ih),
            (FourierMode::new(0, -1), ih),
        ]))
    }

    /// `i x1 + x2` on the sphere.
    pub fn sphere_lowering() -> Self {
        SymbolSpec::Sphere(Symbol::from_terms([
            (Monomial::new(1, 0, 0), Complex64::new(0.0, 1.0)),
            (Monomial::new(0, 1, 0), Complex64::new(1.0, 0.0)),
        ]))
    }

    /// `x3` on the sphere.
    pub fn sphere_height() -> Self {
        SymbolSpec::Sphere(Symbol::from_terms([(Monomial::new(0, 0, 1), Complex64::new(1.0, 0.0))]))
    }

    pub fn eval_principal(&self, p: &ManifoldPoint) -> Result<Complex64> {
        match self {
            SymbolSpec::Torus(s) => s.eval_principal(p),
            SymbolSpec::Sphere(s) => s.eval_principal(p),
        }
    }

    pub fn eval(&self, p: &ManifoldPoint, n: usize) -> Result<Complex64> {
        match self {
            SymbolSpec::Torus(s) => s.eval(p, n),
            SymbolSpec::Sphere(s) => s.eval(p, n),
        }
    }

    pub fn principal(&self) -> Self {
        match self {
            SymbolSpec::Torus(s) => SymbolSpec::Torus(s.principal()),
            SymbolSpec::Sphere(s) => SymbolSpec::Sphere(s.principal()),
        }
    }

    pub fn at_n(&self, n: usize) -> Self {
        match self {
            SymbolSpec::Torus(s) => SymbolSpec::Torus(s.at_n(n)),
            SymbolSpec::Sphere(s) => SymbolSpec::Sphere(s.at_n(n)),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            SymbolSpec::Torus(s) => s.is_real(),
            SymbolSpec::Sphere(s) => s.is_real(),
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            SymbolSpec::Torus(s) => s.degree(),
            SymbolSpec::Sphere(s) => s.degree(),
        }
    }

    pub fn coefficient_l1(&self) -> f64 {
        match self {
            SymbolSpec::Torus(s) => s.coefficient_l1(),
            SymbolSpec::Sphere(s) => s.coefficient_l1(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        match self {
            SymbolSpec::Torus(s) => SymbolSpec::Torus(s.scale(c)),
            SymbolSpec::Sphere(s) => SymbolSpec::Sphere(s.scale(c)),
        }
    }

    /// `self * other`; errors when the kinds differ.
    pub fn try_mul(&self, other: &SymbolSpec) -> Result<Self> {
        match (self, other) {
            (SymbolSpec::Torus(a), SymbolSpec::Torus(b)) => Ok(SymbolSpec::Torus(a * b)),
            (SymbolSpec::Sphere(a), SymbolSpec::Sphere(b)) => Ok(SymbolSpec::Sphere(a * b)),
            _ => Err(Error::KindMismatch { expected: self.kind().name() }),
        }
    }

    pub fn try_add(&self, other: &SymbolSpec) -> Result<Self> {
        match (self, other) {
            (SymbolSpec::Torus(a), SymbolSpec::Torus(b)) => Ok(SymbolSpec::Torus(a + b)),
            (SymbolSpec::Sphere(a), SymbolSpec::Sphere(b)) => Ok(SymbolSpec::Sphere(a + b)),
            _ => Err(Error::KindMismatch { expected: self.kind().name() }),
        }
    }

    pub fn compose_polynomial(&self, coeffs: &[f64]) -> Self {
        match self {
            SymbolSpec::Torus(s) => SymbolSpec::Torus(s.compose_polynomial(coeffs)),
            SymbolSpec::Sphere(s) => SymbolSpec::Sphere(s.compose_polynomial(coeffs)),
        }
    }

    pub fn to_record(&self) -> String {
        match self {
            SymbolSpec::Torus(s) => s.to_record(),
            SymbolSpec::Sphere(s) => s.to_record(),
        }
    }

    pub fn parse_record(text: &str) -> Result<Self> {
        let mut lines = text
            .split(['\n', ';'])
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty symbol record".into() })?;
        let mut head = header.split_whitespace();
        if head.next() != Some("symbol") {
            return Err(Error::Parse { line, msg: format!("expected `symbol <kind>`, found {header:?}") });
        }
        let kind: SpaceKind = head
            .next()
            .ok_or(Error::Parse { line, msg: "missing symbol kind".into() })?
            .parse()
            .map_err(|msg| Error::Parse { line, msg })?;
        if let Some(extra) = head.next() {
            return Err(Error::Parse { line, msg: format!("unexpected token {extra:?}") });
        }
        match kind {
            SpaceKind::Torus => parse_body::<FourierMode>(lines).map(SymbolSpec::Torus),
            SpaceKind::Sphere => parse_body::<Monomial>(lines).map(SymbolSpec::Sphere),
        }
    }
}

const MAX_ORDER: usize = 64;

fn parse_body<'a, K: BasisKey>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<Symbol<K>> {
    let mut sym = Symbol::<K>::zero();
    let mut order = 0usize;
    let mut seen = std::collections::BTreeSet::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        let err = |msg: String| Error::Parse { line, msg };
        match fields[0] {
            "order" => {
                if fields.len() != 2 {
                    return Err(err("expected `order <j>`".into()));
                }
                order = fields[1].parse().map_err(|e| err(format!("order index: {e}")))?;
                if order > MAX_ORDER {
                    return Err(err(format!("order {order} exceeds {MAX_ORDER}")));
                }
            }
            "term" => {
                let want = 1 + K::ARITY + 2;
                if fields.len() != want {
                    return Err(err(format!(
                        "{} term needs {} exponents and re im, found {} fields",
                        K::KIND,
                        K::ARITY,
                        fields.len() - 1
                    )));
                }
                let key = K::parse_exponents(&fields[1..1 + K::ARITY]).map_err(err)?;
                let re = parse_real(fields[1 + K::ARITY]).map_err(err)?;
                let im = parse_real(fields[2 + K::ARITY]).map_err(err)?;
                if !seen.insert((order, key)) {
                    return Err(err(format!("duplicate term {key:?} in order {order}")));
                }
                sym.add_term(order, key, Complex64::new(re, im));
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    Ok(sym)
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v = f64::from_str(s).map_err(|e| format!("coefficient {s:?}: {e}"))?;
    if !v.is_finite() {
        return Err(format!("coefficient {s:?} is not finite"));
    }
    Ok(v)
}

impl FromStr for SymbolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_record(s)
    }
}

/// Serialized as its text record.
impl serde::Serialize for SymbolSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_record())
    }
}

impl<'de> serde::Deserialize<'de> for SymbolSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        SymbolSpec::parse_record(&text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}
