//! Quartic branch divisors on the scroll over a rational normal curve.
//!
//! Coordinates are z0..zn. The scroll Y is parametrized by
//! (u0, u1, s, a, b) with zj = s u0^(n-2-j) u1^j for j <= n-2, z(n-1) = a, zn = b.
//! The quartic is F = z0 z(n-1) zn f - Q^2 with f linear in z0..z(n-2).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::poly::{rat, rat_from_str, rat_to_string, var_names, MultiPoly, PolyJson, UniPoly};
use crate::qfield::{eval_poly, is_perfect_square, QElem};

/// A point (u0:u1) of the projective line.
pub type Root = [BigRational; 2];

pub fn z_vars(n: usize) -> Vec<String> {
    var_names("z", n + 1)
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(EngineError::InvalidN { n, min: 4 });
    }
    Ok(())
}

pub fn root(u0: i64, u1: i64) -> Root {
    [rat(u0), rat(u1)]
}

/// Representative with u0 = 1 when u0 != 0, otherwise (0:1).
pub fn normalize_root(r: &Root) -> Result<Root> {
    if r[0].is_zero() && r[1].is_zero() {
        return Err(EngineError::InvalidRoots("(0:0) is not a point".into()));
    }
    if r[0].is_zero() {
        return Ok([BigRational::zero(), BigRational::one()]);
    }
    Ok([BigRational::one(), &r[1] / &r[0]])
}

pub fn splitting_point() -> Root {
    [BigRational::zero(), BigRational::one()]
}

fn root_string(r: &Root) -> String {
    format!("({}:{})", r[0], r[1])
}

/// Images of z0..zn under the full scroll parametrization, over (u0, u1, s, a, b).
pub fn scroll_images(n: usize) -> Vec<MultiPoly> {
    let v = names(&["u0", "u1", "s", "a", "b"]);
    let mut out: Vec<MultiPoly> = (0..=n - 2)
        .map(|j| {
            MultiPoly::monomial(&v, vec![(n - 2 - j) as u32, j as u32, 1, 0, 0], BigRational::one())
        })
        .collect();
    out.push(MultiPoly::var(&v, 3));
    out.push(MultiPoly::var(&v, 4));
    out
}

fn binary_form_to_linear(n: usize, form: &MultiPoly) -> MultiPoly {
    let zv = z_vars(n);
    let mut f = MultiPoly::zero(&zv);
    for (e, c) in form.terms() {
        let j = e[1] as usize;
        let mut ze = vec![0; n + 1];
        ze[j] = 1;
        f.add_term(ze, c.clone());
    }
    f
}

fn root_product(n: usize, roots: &[Root], distinct: bool) -> Result<(Vec<Root>, MultiPoly)> {
    check_n(n)?;
    if roots.len() != n - 2 {
        return Err(EngineError::InvalidRoots(format!(
            "expected {} roots, got {}",
            n - 2,
            roots.len()
        )));
    }
    let normal: Vec<Root> = roots.iter().map(normalize_root).collect::<Result<_>>()?;
    if normal.iter().any(|r| r[0].is_zero()) {
        return Err(EngineError::InvalidRoots(
            "(0:1) is reserved for the splitting fiber".into(),
        ));
    }
    if distinct {
        for i in 0..normal.len() {
            for j in 0..i {
                if normal[i] == normal[j] {
                    return Err(EngineError::InvalidRoots(format!(
                        "repeated root {}",
                        root_string(&normal[i])
                    )));
                }
            }
        }
    }
    let uv = names(&["u0", "u1"]);
    let u0 = MultiPoly::var(&uv, 0);
    let u1 = MultiPoly::var(&uv, 1);
    let mut prod = MultiPoly::constant(&uv, BigRational::one());
    for r in &normal {
        let factor = &u1.scale(&r[0]) - &u0.scale(&r[1]);
        prod = &prod * &factor;
    }
    Ok((normal, prod))
}

/// Linear form in z0..z(n-2) whose pullback to the rational normal curve is
/// the product of u1*r0 - u0*r1 over the roots.
pub fn linear_form_from_roots(n: usize, roots: &[Root]) -> Result<MultiPoly> {
    let (_, prod) = root_product(n, roots, true)?;
    Ok(binary_form_to_linear(n, &prod))
}

/// Same construction allowing repeated roots.
pub fn linear_form_from_root_multiset(n: usize, roots: &[Root]) -> Result<MultiPoly> {
    let (_, prod) = root_product(n, roots, false)?;
    Ok(binary_form_to_linear(n, &prod))
}

/// Pullback of a polynomial in z0..z(n-2) to the binary forms in (u0, u1).
pub fn pull_to_curve(p: &MultiPoly, n: usize) -> Result<MultiPoly> {
    let uv = names(&["u0", "u1"]);
    let mut imgs: Vec<MultiPoly> = (0..=n - 2)
        .map(|j| MultiPoly::monomial(&uv, vec![(n - 2 - j) as u32, j as u32], BigRational::one()))
        .collect();
    imgs.push(MultiPoly::zero(&uv));
    imgs.push(MultiPoly::zero(&uv));
    p.compose(&imgs)
}

/// Membership in the ideal of Y, decided by composing with the parametrization.
pub fn ideal_member(p: &MultiPoly, n: usize) -> Result<bool> {
    check_n(n)?;
    if p.vars() != z_vars(n).as_slice() {
        return Err(EngineError::Poly("polynomial is not over z0..zn".into()));
    }
    if !p.is_homogeneous() {
        return Err(EngineError::Poly("ideal membership needs a homogeneous polynomial".into()));
    }
    Ok(p.compose(&scroll_images(n))?.is_zero())
}

/// The 2x2 minors zi z(j+1) - z(i+1) zj for 0 <= i < j <= n-3.
pub fn hankel_generators(n: usize) -> Result<Vec<MultiPoly>> {
    check_n(n)?;
    let zv = z_vars(n);
    let z = |i: usize| MultiPoly::var(&zv, i);
    let mut out = Vec::new();
    for i in 0..n - 2 {
        for j in i + 1..n - 2 {
            out.push(&(&z(i) * &z(j + 1)) - &(&z(i + 1) * &z(j)));
        }
    }
    Ok(out)
}

/// Restriction to the plane over a point of the base line, in (s, a, b).
pub fn fiber_restrict(p: &MultiPoly, n: usize, lambda: &Root) -> Result<MultiPoly> {
    let v = names(&["s", "a", "b"]);
    let mut imgs = Vec::with_capacity(n + 1);
    for j in 0..=n - 2 {
        let mut c = BigRational::one();
        for _ in 0..n - 2 - j {
            c *= &lambda[0];
        }
        for _ in 0..j {
            c *= &lambda[1];
        }
        imgs.push(MultiPoly::var(&v, 0).scale(&c));
    }
    imgs.push(MultiPoly::var(&v, 1));
    imgs.push(MultiPoly::var(&v, 2));
    p.compose(&imgs)
}

pub type Matrix3 = [[BigRational; 3]; 3];

/// Symmetric matrix of Q restricted to the plane of z(n-2), z(n-1), zn.
pub fn splitting_matrix(q: &MultiPoly, n: usize) -> Matrix3 {
    let idx = [n - 2, n - 1, n];
    let two = rat(2);
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let mut e = vec![0u32; n + 1];
            e[idx[r]] += 1;
            e[idx[c]] += 1;
            let k = q.coeff(&e);
            if r == c {
                k
            } else {
                k / &two
            }
        })
    })
}

pub fn rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &m[r][c];
            for k in c..cols {
                let t = &f * &m[r][k];
                m[i][k] -= t;
            }
        }
        r += 1;
    }
    r
}

fn rank3(m: &Matrix3) -> usize {
    rank(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn cross(a: &[BigRational; 3], b: &[BigRational; 3]) -> [BigRational; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

/// The splitting conic as a product of two distinct lines over Q(sqrt d).
#[derive(Clone, Debug, Serialize)]
pub struct ConicFactorization {
    pub rank: usize,
    #[serde(serialize_with = "ser_rats")]
    pub kernel: Vec<BigRational>,
    #[serde(serialize_with = "ser_rat")]
    pub discriminant: BigRational,
    pub field: String,
    pub rational_lines: bool,
    pub lines: [Vec<String>; 2],
    pub product_matches: bool,
    pub lines_distinct: bool,
}

impl ConicFactorization {
    pub fn verified(&self) -> bool {
        self.rank == 2 && self.product_matches && self.lines_distinct
    }
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rat_to_string(r))
}

fn ser_rats<S: serde::Serializer>(
    v: &[BigRational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rat_to_string))
}

fn rank_error(r: usize) -> EngineError {
    match r {
        3 => EngineError::InvalidQuadric("splitting conic has rank 3 and is irreducible".into()),
        1 => EngineError::InvalidQuadric("splitting conic has rank 1: double line".into()),
        _ => EngineError::InvalidQuadric("splitting conic vanishes identically".into()),
    }
}

pub fn factor_splitting_conic(q: &MultiPoly, n: usize) -> Result<ConicFactorization> {
    let m = splitting_matrix(q, n);
    let r = rank3(&m);
    if r != 2 {
        return Err(rank_error(r));
    }
    let kernel = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| cross(&m[i], &m[j]))
        .find(|v| v.iter().any(|x| !x.is_zero()))
        .expect("rank 2 has two independent rows");
    let p = (0..3).find(|&i| !kernel[i].is_zero()).expect("nonzero kernel");
    let others: Vec<usize> = (0..3).filter(|&i| i != p).collect();
    let (ia, ib) = (others[0], others[1]);
    // w1 = z_a - (v_a/v_p) z_p, w2 = z_b - (v_b/v_p) z_p
    let mut w1 = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
    let mut w2 = w1.clone();
    w1[ia] = BigRational::one();
    w1[p] = -&kernel[ia] / &kernel[p];
    w2[ib] = BigRational::one();
    w2[p] = -&kernel[ib] / &kernel[p];
    let (a, b, c) = (m[ia][ia].clone(), m[ia][ib].clone(), m[ib][ib].clone());
    let disc = &b * &b - &a * &c;
    let sq = QElem::sqrt_of(&disc);
    let d = sq.d.clone();
    let lift = |v: &[BigRational; 3]| -> Vec<QElem> {
        v.iter().map(|x| QElem::rational(&d, x.clone())).collect()
    };
    let comb = |x: &[QElem], y: &[QElem], k: &QElem| -> Vec<QElem> {
        x.iter().zip(y).map(|(p, q)| p.sub(&q.mul(k))).collect()
    };
    let (l1, l2) = if !a.is_zero() {
        let minus_b = QElem::rational(&d, -&b);
        let inv_a = BigRational::one() / &a;
        let r_plus = minus_b.add(&sq).scale(&inv_a);
        let r_minus = minus_b.sub(&sq).scale(&inv_a);
        let l1: Vec<QElem> = comb(&lift(&w1), &lift(&w2), &r_plus)
            .into_iter()
            .map(|x| x.scale(&a))
            .collect();
        (l1, comb(&lift(&w1), &lift(&w2), &r_minus))
    } else {
        let two_b = &b * rat(2);
        let l2: Vec<QElem> = (0..3)
            .map(|i| QElem::rational(&d, &w1[i] * &two_b + &w2[i] * &c))
            .collect();
        (lift(&w2), l2)
    };
    let mut product_matches = true;
    for i in 0..3 {
        for j in i..3 {
            let prod = if i == j {
                l1[i].mul(&l2[i])
            } else {
                l1[i].mul(&l2[j]).add(&l1[j].mul(&l2[i]))
            };
            let want = if i == j { m[i][i].clone() } else { &m[i][j] * rat(2) };
            if !prod.sub(&QElem::rational(&d, want)).is_zero() {
                product_matches = false;
            }
        }
    }
    let lines_distinct = (0..3).any(|i| {
        (0..3).any(|j| !l1[i].mul(&l2[j]).sub(&l1[j].mul(&l2[i])).is_zero())
    });
    Ok(ConicFactorization {
        rank: r,
        kernel: kernel.to_vec(),
        discriminant: disc.clone(),
        field: format!("Q(sqrt({d}))"),
        rational_lines: is_perfect_square(&d),
        lines: [
            l1.iter().map(|x| x.to_string()).collect(),
            l2.iter().map(|x| x.to_string()).collect(),
        ],
        product_matches,
        lines_distinct,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuarticInstance {
    pub n: usize,
    pub roots: Vec<Root>,
    pub f: MultiPoly,
    pub q: MultiPoly,
    pub big_f: MultiPoly,
    /// Q vanishes on the line z0 = ... = z(n-2) = 0.
    pub ridge_degenerate: bool,
}

fn validate_q(q: &MultiPoly, n: usize) -> Result<()> {
    if q.vars() != z_vars(n).as_slice() {
        return Err(EngineError::InvalidQuadric("Q is not over z0..zn".into()));
    }
    if q.homogeneous_degree() != Some(2) {
        return Err(EngineError::InvalidQuadric("Q is not a nonzero quadratic form".into()));
    }
    let r = rank3(&splitting_matrix(q, n));
    if r != 2 {
        return Err(rank_error(r));
    }
    if ideal_member(q, n)? {
        return Err(EngineError::InvalidQuadric("Q vanishes identically on the scroll".into()));
    }
    Ok(())
}

fn ridge_degenerate(q: &MultiPoly, n: usize) -> bool {
    q.terms()
        .all(|(e, _)| e[..=n - 2].iter().any(|&k| k > 0))
}

fn assemble_f(n: usize, f: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    let zv = z_vars(n);
    let mut e = vec![0; n + 1];
    e[0] = 1;
    e[n - 1] = 1;
    e[n] = 1;
    let lead = MultiPoly::monomial(&zv, e, BigRational::one());
    &(&lead * f) - &q.pow(2)
}

/// Builds F from distinct roots and a quadric satisfying the splitting constraint.
pub fn build_instance(n: usize, roots: &[Root], q: MultiPoly) -> Result<QuarticInstance> {
    check_n(n)?;
    let f = linear_form_from_roots(n, roots)?;
    validate_q(&q, n)?;
    let normal: Vec<Root> = roots.iter().map(normalize_root).collect::<Result<_>>()?;
    Ok(QuarticInstance {
        n,
        big_f: assemble_f(n, &f, &q),
        ridge_degenerate: ridge_degenerate(&q, n),
        roots: normal,
        f,
        q,
    })
}

impl QuarticInstance {
    /// Instance from a root multiset (repeats allowed) and a quadric.
    pub fn from_parts(n: usize, roots: &[Root], q: MultiPoly) -> Result<Self> {
        check_n(n)?;
        let f = linear_form_from_root_multiset(n, roots)?;
        validate_q(&q, n)?;
        let normal: Vec<Root> = roots.iter().map(normalize_root).collect::<Result<_>>()?;
        Ok(Self {
            n,
            big_f: assemble_f(n, &f, &q),
            ridge_degenerate: ridge_degenerate(&q, n),
            roots: normal,
            f,
            q,
        })
    }

    /// Special fibers: the roots of f and the splitting point.
    pub fn special_fibers(&self) -> Vec<Root> {
        let mut v = self.roots.clone();
        v.push(splitting_point());
        v
    }

    pub fn to_json(&self) -> InstanceJson {
        let terms = |p: &MultiPoly| PolyJson::from(p).terms;
        InstanceJson {
            n: self.n,
            roots: self
                .roots
                .iter()
                .map(|r| [rat_to_string(&r[0]), rat_to_string(&r[1])])
                .collect(),
            q: terms(&self.q),
            f: terms(&self.f),
            big_f: terms(&self.big_f),
        }
    }

    pub fn from_json(j: &InstanceJson) -> Result<Self> {
        let zv = z_vars(j.n);
        let poly = |t: &BTreeMap<String, String>| {
            MultiPoly::try_from(&PolyJson {
                vars: zv.clone(),
                terms: t.clone(),
            })
        };
        let roots: Vec<Root> = j
            .roots
            .iter()
            .map(|[a, b]| Ok([rat_from_str(a)?, rat_from_str(b)?]))
            .collect::<Result<_>>()?;
        let inst = build_instance(j.n, &roots, poly(&j.q)?)?;
        if inst.f != poly(&j.f)? || inst.big_f != poly(&j.big_f)? {
            return Err(EngineError::Parse(
                "stored f or F disagrees with the roots and Q".into(),
            ));
        }
        Ok(inst)
    }
}

/// Wire form of an instance; polynomials map comma-joined exponents to "num/den".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub roots: Vec<[String; 2]>,
    #[serde(rename = "Q")]
    pub q: BTreeMap<String, String>,
    pub f: BTreeMap<String, String>,
    #[serde(rename = "F")]
    pub big_f: BTreeMap<String, String>,
}

fn small_rational(rng: &mut impl Rng) -> BigRational {
    BigRational::new(
        BigInt::from(rng.random_range(-12i64..=12)),
        BigInt::from(rng.random_range(1i64..=4)),
    )
}

fn random_roots(n: usize, rng: &mut impl Rng) -> Vec<Root> {
    let mut ts: Vec<BigRational> = Vec::new();
    while ts.len() < n - 2 {
        let t = small_rational(rng);
        if !ts.contains(&t) {
            ts.push(t);
        }
    }
    ts.into_iter().map(|t| [BigRational::one(), t]).collect()
}

/// Quadric whose splitting block is P^T diag(d1, d2, 0) P and whose other coefficients are random.
pub fn random_quadric(n: usize, rng: &mut impl Rng) -> MultiPoly {
    let zv = z_vars(n);
    let block = loop {
        let p: [[i64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-3..=3)));
        let pr: Vec<Vec<BigRational>> = p.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        if rank(&pr) != 3 {
            continue;
        }
        let nz = |rng: &mut dyn rand::RngCore| loop {
            let v: i64 = rng.random_range(-5..=5);
            if v != 0 {
                break v;
            }
        };
        let dg = [nz(rng), nz(rng), 0];
        let m: [[i64; 3]; 3] = std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).map(|k| p[k][i] * dg[k] * p[k][j]).sum())
        });
        break m;
    };
    let base = n - 2;
    let mut q = MultiPoly::zero(&zv);
    for i in 0..=n {
        for j in i..=n {
            let mut e = vec![0; n + 1];
            e[i] += 1;
            e[j] += 1;
            let c = if i >= base && j >= base {
                let (bi, bj) = (i - base, j - base);
                if bi == bj {
                    block[bi][bi]
                } else {
                    2 * block[bi][bj]
                }
            } else {
                rng.random_range(-6..=6)
            };
            q.add_term(e, rat(c));
        }
    }
    q
}

/// Seeded instance with distinct roots, a rank-2 splitting block and no ridge degeneracy.
pub fn random_instance(n: usize, rng: &mut impl Rng) -> Result<QuarticInstance> {
    check_n(n)?;
    loop {
        let roots = random_roots(n, rng);
        let q = random_quadric(n, rng);
        match build_instance(n, &roots, q) {
            Ok(inst) if !inst.ridge_degenerate => return Ok(inst),
            Ok(_) | Err(EngineError::InvalidQuadric(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

pub fn instance_from_seed(n: usize, seed: u64) -> Result<QuarticInstance> {
    random_instance(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_generic_lambda(inst: &QuarticInstance, rng: &mut impl Rng) -> Root {
    loop {
        let t = small_rational(rng) + BigRational::new(BigInt::one(), BigInt::from(7));
        let r = [BigRational::one(), t];
        if !inst.roots.contains(&r) {
            return r;
        }
    }
}

fn restrict_to_line(p: &MultiPoly, base: &[i64], dir: &[i64]) -> Result<UniPoly> {
    let tv = names(&["t"]);
    let t = MultiPoly::var(&tv, 0);
    let imgs: Vec<MultiPoly> = base
        .iter()
        .zip(dir)
        .map(|(&b, &d)| &MultiPoly::constant(&tv, rat(b)) + &t.scale(&rat(d)))
        .collect();
    p.compose(&imgs)?.to_univariate(0)
}

/// Certifies that a ternary form is not a constant times a square by finding a line
/// on which its restriction has a simple root.
pub fn certify_not_square(p: &MultiPoly, rng: &mut impl Rng, attempts: usize) -> Result<bool> {
    let deg = match p.homogeneous_degree() {
        Some(d) => d as usize,
        None => return Ok(false),
    };
    for _ in 0..attempts {
        let base: Vec<i64> = (0..p.nvars()).map(|_| rng.random_range(-9..=9)).collect();
        let dir: Vec<i64> = (0..p.nvars()).map(|_| rng.random_range(-9..=9)).collect();
        let u = restrict_to_line(p, &base, &dir)?;
        if u.degree() != Some(deg) {
            continue;
        }
        if !u.is_square_up_to_constant() {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberCheck {
    pub lambda: String,
    pub vanishes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleConicReport {
    pub special_fibers: Vec<FiberCheck>,
    pub generic_lambda: String,
    pub generic_nonzero: bool,
    pub generic_not_square: bool,
    pub cone_n: bool,
    pub cone_n1: bool,
    pub splitting: ConicFactorization,
}

impl DoubleConicReport {
    pub fn pass(&self) -> bool {
        self.special_fibers.iter().all(|f| f.vanishes)
            && self.generic_nonzero
            && self.generic_not_square
            && self.cone_n
            && self.cone_n1
            && self.splitting.verified()
    }
}

pub fn double_conic_verify(inst: &QuarticInstance, rng: &mut impl Rng) -> Result<DoubleConicReport> {
    let n = inst.n;
    let branch = |lam: &Root| -> Result<MultiPoly> {
        let fr = fiber_restrict(&inst.big_f, n, lam)?;
        let qr = fiber_restrict(&inst.q, n, lam)?;
        Ok(&fr + &qr.pow(2))
    };
    let mut special_fibers = Vec::new();
    for lam in inst.special_fibers() {
        special_fibers.push(FiberCheck {
            lambda: root_string(&lam),
            vanishes: branch(&lam)?.is_zero(),
        });
    }
    let lam = random_generic_lambda(inst, rng);
    let generic_nonzero = !branch(&lam)?.is_zero();
    let generic_not_square = certify_not_square(&fiber_restrict(&inst.big_f, n, &lam)?, rng, 16)?;
    let cone = |k: usize| {
        let zero = BigRational::zero();
        let fc = inst.big_f.substitute_value(k, &zero);
        let qc = inst.q.substitute_value(k, &zero);
        fc == -&qc.pow(2)
    };
    Ok(DoubleConicReport {
        special_fibers,
        generic_lambda: root_string(&lam),
        generic_nonzero,
        generic_not_square,
        cone_n: cone(n - 1),
        cone_n1: cone(n),
        splitting: factor_splitting_conic(&inst.q, n)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleCurveDegree {
    pub side: usize,
    pub degree: Option<usize>,
    pub distinct_points: Option<usize>,
    pub expected: usize,
    pub attempts: usize,
    pub ridge_degenerate: bool,
}

const HYPERPLANE_ATTEMPTS: usize = 8;

/// Degree of {Q = 0} on the cone z(side-1) = 0 of Y, by counting its points on a random hyperplane.
pub fn double_curve_degree(
    inst: &QuarticInstance,
    side: usize,
    rng: &mut impl Rng,
) -> Result<DoubleCurveDegree> {
    let n = inst.n;
    if side != n && side != n + 1 {
        return Err(EngineError::OutOfRange(format!("cone side {side} for n = {n}")));
    }
    let expected = 2 * (n - 2);
    let mut out = DoubleCurveDegree {
        side,
        degree: None,
        distinct_points: None,
        expected,
        attempts: 0,
        ridge_degenerate: inst.ridge_degenerate,
    };
    if inst.ridge_degenerate {
        return Ok(out);
    }
    let zeroed = side - 1;
    let other = if zeroed == n - 1 { n } else { n - 1 };
    let uv = names(&["u0", "u1"]);
    for attempt in 1..=HYPERPLANE_ATTEMPTS {
        out.attempts = attempt;
        let h: Vec<i64> = (0..=n - 2).map(|_| rng.random_range(-9..=9)).collect();
        let h_other: i64 = rng.random_range(-9..=9);
        if h_other == 0 {
            continue;
        }
        let mono = |j: usize| {
            MultiPoly::monomial(&uv, vec![(n - 2 - j) as u32, j as u32], BigRational::one())
        };
        let mut hu = MultiPoly::zero(&uv);
        for (j, &hj) in h.iter().enumerate() {
            hu = &hu + &mono(j).scale(&rat(hj));
        }
        let mut imgs: Vec<MultiPoly> = (0..=n - 2).map(mono).collect();
        imgs.push(MultiPoly::zero(&uv));
        imgs.push(MultiPoly::zero(&uv));
        imgs[other] = hu.scale(&BigRational::new(BigInt::from(-1), BigInt::from(h_other)));
        let g = inst.q.compose(&imgs)?;
        if g.is_zero() {
            continue;
        }
        let total = g.homogeneous_degree().ok_or_else(|| {
            EngineError::Poly("restricted quadric is not a binary form".into())
        })? as usize;
        let affine = g.substitute_value(0, &BigRational::one()).to_univariate(1)?;
        let at_infinity = total - affine.degree().unwrap_or(0);
        let sqf = affine.squarefree_decomposition();
        let affine_count: usize = sqf.iter().map(|(m, p)| m * p.degree().unwrap_or(0)).sum();
        let affine_distinct: usize = sqf.iter().map(|(_, p)| p.degree().unwrap_or(0)).sum();
        out.degree = Some(affine_count + at_infinity);
        out.distinct_points = Some(affine_distinct + usize::from(at_infinity > 0));
        return Ok(out);
    }
    Err(EngineError::Poly(format!(
        "no generic hyperplane found in {HYPERPLANE_ATTEMPTS} attempts"
    )))
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothSample {
    pub point: [String; 3],
    pub derivative: String,
    pub nonzero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    pub i: usize,
    pub lambda: String,
    pub requested: usize,
    pub samples: Vec<SmoothSample>,
    pub resamples: usize,
}

impl SmoothnessReport {
    pub fn pass(&self) -> bool {
        self.samples.len() >= self.requested && self.samples.iter().all(|s| s.nonzero)
    }
}

/// dF/dt on the scroll in the affine chart (1:t), over (t, s, a, b).
pub fn lambda_derivative(inst: &QuarticInstance) -> Result<MultiPoly> {
    let n = inst.n;
    let v = names(&["t", "s", "a", "b"]);
    let mut imgs: Vec<MultiPoly> = (0..=n - 2)
        .map(|j| MultiPoly::monomial(&v, vec![j as u32, 1, 0, 0], BigRational::one()))
        .collect();
    imgs.push(MultiPoly::var(&v, 2));
    imgs.push(MultiPoly::var(&v, 3));
    Ok(inst.big_f.compose(&imgs)?.derivative(0))
}

const SAMPLE_ATTEMPT_FACTOR: usize = 64;

/// Probes the first-order term of F in the base direction along the double conic over root i.
pub fn smoothness_probe(
    inst: &QuarticInstance,
    i: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SmoothnessReport> {
    let dft = lambda_derivative(inst)?;
    smoothness_probe_with(inst, &dft, i, samples, rng)
}

pub fn smoothness_probe_with(
    inst: &QuarticInstance,
    dft: &MultiPoly,
    i: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SmoothnessReport> {
    let n = inst.n;
    if i == n - 1 {
        return Err(EngineError::OutOfRange(
            "the splitting fiber is excluded from the smoothness probe".into(),
        ));
    }
    if i == 0 || i > n - 2 {
        return Err(EngineError::OutOfRange(format!("root index {i} for n = {n}")));
    }
    let lam = inst.roots[i - 1].clone();
    let conic = fiber_restrict(&inst.q, n, &lam)?;
    let quartic = fiber_restrict(&inst.big_f, n, &lam)?;
    let deriv = dft.substitute_value(0, &lam[1]);
    let mut report = SmoothnessReport {
        i,
        lambda: root_string(&lam),
        requested: samples,
        samples: Vec::new(),
        resamples: 0,
    };
    let zero3 = |d: &BigInt| [QElem::zero(d), QElem::zero(d), QElem::zero(d)];
    for _ in 0..samples * SAMPLE_ATTEMPT_FACTOR {
        if report.samples.len() >= samples {
            break;
        }
        let base: Vec<i64> = (0..3).map(|_| rng.random_range(-9..=9)).collect();
        let dir: Vec<i64> = (0..3).map(|_| rng.random_range(-9..=9)).collect();
        let u = restrict_to_line(&conic, &base, &dir)?;
        if u.degree() != Some(2) {
            report.resamples += 1;
            continue;
        }
        let c = u.coeffs();
        let disc = &c[1] * &c[1] - &c[0] * &c[2] * rat(4);
        let root_disc = QElem::sqrt_of(&disc);
        let d = root_disc.d.clone();
        let t = QElem::rational(&d, -&c[1])
            .add(&root_disc)
            .scale(&(BigRational::one() / (&c[2] * rat(2))));
        let mut pt = zero3(&d);
        for k in 0..3 {
            pt[k] = QElem::rational(&d, rat(base[k])).add(&t.scale(&rat(dir[k])));
        }
        if !eval_poly(&conic, &pt, &d).is_zero() || !eval_poly(&quartic, &pt, &d).is_zero() {
            return Err(EngineError::Poly("sample point is off the double conic".into()));
        }
        if pt.iter().any(|x| x.is_zero()) {
            report.resamples += 1;
            continue;
        }
        let full = [QElem::zero(&d), pt[0].clone(), pt[1].clone(), pt[2].clone()];
        let val = eval_poly(&deriv, &full, &d);
        report.samples.push(SmoothSample {
            point: [pt[0].to_string(), pt[1].to_string(), pt[2].to_string()],
            derivative: val.to_string(),
            nonzero: !val.is_zero(),
        });
    }
    Ok(report)
}

/// Combined per-instance verification.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub double_conic: DoubleConicReport,
    pub curve_degrees: Vec<DoubleCurveDegree>,
    pub smoothness: Vec<SmoothnessReport>,
}

impl InstanceReport {
    pub fn pass(&self) -> bool {
        self.double_conic.pass()
            && self
                .curve_degrees
                .iter()
                .all(|d| d.degree == Some(d.expected))
            && self.smoothness.iter().all(|s| s.pass())
    }
}

pub fn verify_instance(
    inst: &QuarticInstance,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<InstanceReport> {
    let double_conic = double_conic_verify(inst, rng)?;
    let curve_degrees = vec![
        double_curve_degree(inst, inst.n, rng)?,
        double_curve_degree(inst, inst.n + 1, rng)?,
    ];
    let dft = lambda_derivative(inst)?;
    let smoothness = (1..=inst.n - 2)
        .map(|i| smoothness_probe_with(inst, &dft, i, samples, rng))
        .collect::<Result<_>>()?;
    Ok(InstanceReport {
        double_conic,
        curve_degrees,
        smoothness,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuliRecord {
    pub n: usize,
    pub k: usize,
    pub h1_theta_z: i64,
    pub h1_theta_s: i64,
    pub h0_anticanonical: i64,
    pub h1_anticanonical: i64,
    pub dim_lb_k: i64,
    pub dim_h_k: i64,
    pub dim_h_next: Option<i64>,
    pub dim_alpha_preimage: i64,
    pub moduli_dim: i64,
    pub identities: Vec<(String, bool)>,
}

impl ModuliRecord {
    pub fn consistent(&self) -> bool {
        self.identities.iter().all(|(_, ok)| *ok)
    }
}

fn dim_h(n: i64, k: i64) -> i64 {
    3 * n - 2 * (k - 2)
}

pub fn moduli_formulas(n: usize, k: usize) -> Result<ModuliRecord> {
    check_n(n)?;
    if !(2..=n).contains(&k) {
        return Err(EngineError::OutOfRange(format!("k = {k} outside 2..={n}")));
    }
    let (ni, ki) = (n as i64, k as i64);
    let dim_lb_k = if k < n { 3 * ni - 2 * ki - 2 } else { ni - 1 };
    let dim_h_k = dim_h(ni, ki);
    let dim_h_next = (k < n).then(|| dim_h(ni, ki + 1));
    let dim_alpha_preimage = ni + 4;
    let h0_anticanonical = 1;
    let moduli_dim = ni + 3;
    let mut identities = vec![
        (
            "alpha-preimage minus h0(K^-1) equals moduli".to_string(),
            dim_alpha_preimage - h0_anticanonical == moduli_dim,
        ),
        (
            "top stratum equals alpha-preimage".to_string(),
            dim_h(ni, ni) == dim_alpha_preimage,
        ),
        (
            "line-bundle stratum offset".to_string(),
            dim_lb_k == dim_h_k - if k < n { 6 } else { 5 },
        ),
    ];
    if let Some(next) = dim_h_next {
        identities.push(("stratification decrement".to_string(), dim_h_k - next == 2));
    }
    if k + 2 == n {
        identities.push(("second-to-last stratum".to_string(), dim_lb_k == ni + 2));
    }
    Ok(ModuliRecord {
        n,
        k,
        h1_theta_z: 7 * ni - 15,
        h1_theta_s: 4 * ni - 6,
        h0_anticanonical,
        h1_anticanonical: 2 * ni - 8,
        dim_lb_k,
        dim_h_k,
        dim_h_next,
        dim_alpha_preimage,
        moduli_dim,
        identities,
    })
}

/// True when the pullback of f to the curve has exactly the given simple roots.
pub fn roots_certified(inst: &QuarticInstance) -> Result<bool> {
    let g = pull_to_curve(&inst.f, inst.n)?;
    let at = |r: &Root| g.evaluate(&[r[0].clone(), r[1].clone()]);
    if !at(&splitting_point())?.is_zero() {
        let affine = g.substitute_value(0, &BigRational::one()).to_univariate(1)?;
        let simple = affine
            .squarefree_decomposition()
            .iter()
            .all(|(m, _)| *m == 1);
        let all_vanish = inst
            .roots
            .iter()
            .map(at)
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|v| v.is_zero());
        return Ok(simple && all_vanish && affine.degree() == Some(inst.n - 2));
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_detection() {
        let zv = z_vars(4);
        let q = &MultiPoly::var(&zv, 0) * &MultiPoly::var(&zv, 3);
        assert!(ridge_degenerate(&q, 4));
        let q2 = MultiPoly::var(&zv, 3).pow(2);
        assert!(!ridge_degenerate(&q2, 4));
    }

    #[test]
    fn rank_of_small_matrices() {
        let m = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert_eq!(rank(&m), 1);
    }
}
