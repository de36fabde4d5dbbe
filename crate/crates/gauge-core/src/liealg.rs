//! Matrix Lie groups and algebras: u(1), su(2) and general complex matrix
//! algebras of size n <= 2, with bracket, adjoint action, exponential,
//! logarithm and norms.
//!
//! u(1) is represented by 1x1 purely imaginary matrices so that all algebra
//! code shares a single matrix path. su(2) elements are anti-Hermitian and
//! traceless; the basis used throughout is e_i = i*sigma_i/2, for which
//! [e_1, e_2] = -e_3 (and cyclic).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute per-entry tolerance for structural constraints.
pub const STRUCT_TOL: f64 = 1e-12;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum AlgebraTag {
    U1,
    Su2,
    /// gl(n, C) with n <= 2; `GlnC(1)` doubles as the scalar tag.
    GlnC(usize),
}

impl AlgebraTag {
    /// Matrix size n.
    pub fn n(&self) -> usize {
        match self {
            AlgebraTag::U1 => 1,
            AlgebraTag::Su2 => 2,
            AlgebraTag::GlnC(n) => *n,
        }
    }

    /// Dimension of the algebra as a real vector space.
    pub fn real_dim(&self) -> usize {
        match self {
            AlgebraTag::U1 => 1,
            AlgebraTag::Su2 => 3,
            AlgebraTag::GlnC(n) => 2 * n * n,
        }
    }

    /// Tag for plain complex scalars (coefficients of scalar-valued forms).
    pub fn scalar() -> AlgebraTag {
        AlgebraTag::GlnC(1)
    }

    /// Real basis of the algebra, ordered as used by `LieValue::real_coords`.
    pub fn basis(&self) -> Vec<LieValue> {
        match self {
            AlgebraTag::U1 => vec![LieValue::u1(1.0)],
            AlgebraTag::Su2 => vec![su2_e(1), su2_e(2), su2_e(3)],
            AlgebraTag::GlnC(n) => {
                let mut out = Vec::with_capacity(2 * n * n);
                for r in 0..*n {
                    for c in 0..*n {
                        for &unit in &[ONE, I] {
                            let mut m = [ZERO; 4];
                            m[r * n + c] = unit;
                            out.push(LieValue { tag: *self, entries: m });
                        }
                    }
                }
                out
            }
        }
    }
}

/// su(2) basis element e_i = i*sigma_i/2, i in {1,2,3}.
pub fn su2_e(i: usize) -> LieValue {
    let h = 0.5;
    let entries = match i {
        1 => [ZERO, I * h, I * h, ZERO],
        2 => [ZERO, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), ZERO],
        3 => [I * h, ZERO, ZERO, -I * h],
        _ => panic!("su2 basis index must be 1..=3"),
    };
    LieValue { tag: AlgebraTag::Su2, entries }
}

/// Element of a tagged matrix Lie algebra. Entries are row-major, with
/// `tag.n()^2` slots in use.
#[derive(Clone, Copy, Debug)]
pub struct LieValue {
    pub tag: AlgebraTag,
    pub entries: [Complex64; 4],
}

impl LieValue {
    /// Validated constructor: checks the tag's structural constraints to
    /// `STRUCT_TOL` per entry.
    pub fn new(tag: AlgebraTag, entries: &[Complex64]) -> Result<LieValue> {
        let n = tag.n();
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let mut m = [ZERO; 4];
        m[..n * n].copy_from_slice(entries);
        let v = LieValue { tag, entries: m };
        let defect = v.constraint_defect();
        if defect > STRUCT_TOL {
            return Err(Error::Constraint(format!(
                "algebra constraint defect {defect:.3e} for {tag:?}"
            )));
        }
        Ok(v)
    }

    pub fn zero(tag: AlgebraTag) -> LieValue {
        LieValue { tag, entries: [ZERO; 4] }
    }

    /// The 1x1 purely imaginary element i*im.
    pub fn u1(im: f64) -> LieValue {
        let mut m = [ZERO; 4];
        m[0] = Complex64::new(0.0, im);
        LieValue { tag: AlgebraTag::U1, entries: m }
    }

    /// A plain complex scalar with the scalar tag.
    pub fn scalar(z: Complex64) -> LieValue {
        let mut m = [ZERO; 4];
        m[0] = z;
        LieValue { tag: AlgebraTag::scalar(), entries: m }
    }

    /// su(2) element from coordinates in the basis (e_1, e_2, e_3).
    pub fn su2(c1: f64, c2: f64, c3: f64) -> LieValue {
        su2_e(1) * c1 + su2_e(2) * c2 + su2_e(3) * c3
    }

    pub fn n(&self) -> usize {
        self.tag.n()
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.n() + c]
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.n();
        (0..n).map(|i| self.entries[i * n + i]).sum()
    }

    pub fn det(&self) -> Complex64 {
        match self.n() {
            1 => self.entries[0],
            2 => self.entries[0] * self.entries[3] - self.entries[1] * self.entries[2],
            _ => unreachable!(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> LieValue {
        let n = self.n();
        let mut m = [ZERO; 4];
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] = self.entries[c * n + r].conj();
            }
        }
        LieValue { tag: self.tag, entries: m }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let n = self.n();
        self.entries[..n * n].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        let n = self.n();
        self.entries[..n * n].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when every stored entry is finite (max-based norms skip NaN).
    pub fn is_finite(&self) -> bool {
        let n = self.n();
        self.entries[..n * n].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Operator (spectral) norm; closed form for n <= 2.
    pub fn op_norm(&self) -> f64 {
        match self.n() {
            1 => self.entries[0].norm(),
            _ => {
                let a = mat_mul(&self.dagger(), self);
                // Hermitian PSD 2x2: eigenvalues from trace and determinant.
                let t = a.trace().re;
                let d = a.det().re.max(0.0);
                let disc = (t * t / 4.0 - d).max(0.0).sqrt();
                (t / 2.0 + disc).max(0.0).sqrt()
            }
        }
    }

    /// Entrywise deviation from the tag's structural constraints.
    pub fn constraint_defect(&self) -> f64 {
        match self.tag {
            AlgebraTag::U1 => self.entries[0].re.abs(),
            AlgebraTag::Su2 => {
                let anti = (*self + self.dagger()).max_abs_entry();
                anti.max(self.trace().norm())
            }
            AlgebraTag::GlnC(_) => 0.0,
        }
    }

    /// Orthogonal projection onto the algebra (removes rounding-level
    /// constraint defects after algebra-closed operations).
    pub fn structural_projection(&self) -> LieValue {
        match self.tag {
            AlgebraTag::U1 => LieValue::u1(self.entries[0].im),
            AlgebraTag::Su2 => {
                let anti = (*self - self.dagger()) * 0.5;
                let tr = anti.trace() / 2.0;
                let mut m = anti.entries;
                m[0] -= tr;
                m[3] -= tr;
                LieValue { tag: AlgebraTag::Su2, entries: m }
            }
            AlgebraTag::GlnC(_) => *self,
        }
    }

    /// Coordinates in `tag.basis()` (real coefficients).
    pub fn real_coords(&self) -> Vec<f64> {
        match self.tag {
            AlgebraTag::U1 => vec![self.entries[0].im],
            AlgebraTag::Su2 => {
                // entries = [[i c3/2, (c2 + i c1)/2], [(-c2 + i c1)/2, -i c3/2]]
                let c1 = 2.0 * self.entries[1].im;
                let c2 = 2.0 * self.entries[1].re;
                let c3 = 2.0 * self.entries[0].im;
                vec![c1, c2, c3]
            }
            AlgebraTag::GlnC(n) => {
                let mut out = Vec::with_capacity(2 * n * n);
                for e in &self.entries[..n * n] {
                    out.push(e.re);
                    out.push(e.im);
                }
                out
            }
        }
    }

    pub fn from_real_coords(tag: AlgebraTag, coords: &[f64]) -> LieValue {
        let basis = tag.basis();
        assert_eq!(basis.len(), coords.len(), "coordinate length mismatch");
        let mut acc = LieValue::zero(tag);
        for (b, &c) in basis.iter().zip(coords) {
            acc = acc + *b * c;
        }
        acc
    }

    /// Scale by a complex number. Only meaningful for GlnC tags; panics if the
    /// result would leave a constrained algebra.
    pub fn scale_complex(&self, z: Complex64) -> LieValue {
        match self.tag {
            AlgebraTag::GlnC(_) => {
                let mut m = self.entries;
                for e in &mut m {
                    *e *= z;
                }
                LieValue { tag: self.tag, entries: m }
            }
            _ => panic!("complex scaling leaves {:?}", self.tag),
        }
    }

    /// Reinterpret the entries under a different tag without validation.
    pub fn retag(&self, tag: AlgebraTag) -> LieValue {
        assert_eq!(tag.n(), self.n(), "retag must preserve matrix size");
        LieValue { tag, entries: self.entries }
    }
}

impl std::ops::Add for LieValue {
    type Output = LieValue;
    fn add(self, rhs: LieValue) -> LieValue {
        assert_eq!(self.tag, rhs.tag, "algebra mismatch");
        let mut m = self.entries;
        for (a, b) in m.iter_mut().zip(rhs.entries.iter()) {
            *a += b;
        }
        LieValue { tag: self.tag, entries: m }
    }
}

impl std::ops::Sub for LieValue {
    type Output = LieValue;
    fn sub(self, rhs: LieValue) -> LieValue {
        assert_eq!(self.tag, rhs.tag, "algebra mismatch");
        let mut m = self.entries;
        for (a, b) in m.iter_mut().zip(rhs.entries.iter()) {
            *a -= b;
        }
        LieValue { tag: self.tag, entries: m }
    }
}

impl std::ops::Neg for LieValue {
    type Output = LieValue;
    fn neg(self) -> LieValue {
        self * (-1.0)
    }
}

impl std::ops::Mul<f64> for LieValue {
    type Output = LieValue;
    fn mul(self, rhs: f64) -> LieValue {
        let mut m = self.entries;
        for e in &mut m {
            *e *= rhs;
        }
        LieValue { tag: self.tag, entries: m }
    }
}

fn mat_mul(a: &LieValue, b: &LieValue) -> LieValue {
    debug_assert_eq!(a.n(), b.n());
    let n = a.n();
    let mut m = [ZERO; 4];
    for r in 0..n {
        for c in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += a.entries[r * n + k] * b.entries[k * n + c];
            }
            m[r * n + c] = s;
        }
    }
    LieValue { tag: a.tag, entries: m }
}

/// Matrix product a*b (no structural projection; result keeps a's tag slot).
pub fn matrix_product(a: &LieValue, b: &LieValue) -> LieValue {
    mat_mul(a, b)
}

/// Lie bracket [a, b] = ab - ba.
pub fn bracket(a: &LieValue, b: &LieValue) -> Result<LieValue> {
    if a.tag != b.tag {
        return Err(Error::AlgebraMismatch);
    }
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    Ok((ab - ba).structural_projection())
}

/// Adjoint action ad(g) a = g a g^{-1}.
pub fn adjoint(g: &GroupElement, a: &LieValue) -> Result<LieValue> {
    if g.tag != a.tag {
        return Err(Error::AlgebraMismatch);
    }
    let gi = g.inverse();
    let ga = mat_mul(&g.as_value(), a);
    let gag = mat_mul(&ga, &gi.as_value());
    Ok(gag.structural_projection())
}

/// Element of the group attached to a tag: U(1), SU(2) or GL(n, C).
#[derive(Clone, Copy, Debug)]
pub struct GroupElement {
    pub tag: AlgebraTag,
    pub entries: [Complex64; 4],
}

impl GroupElement {
    pub fn new(tag: AlgebraTag, entries: &[Complex64]) -> Result<GroupElement> {
        let n = tag.n();
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let mut m = [ZERO; 4];
        m[..n * n].copy_from_slice(entries);
        let g = GroupElement { tag, entries: m };
        let defect = g.constraint_defect();
        if defect > STRUCT_TOL {
            return Err(Error::Constraint(format!(
                "group constraint defect {defect:.3e} for {tag:?}"
            )));
        }
        Ok(g)
    }

    pub fn identity(tag: AlgebraTag) -> GroupElement {
        let n = tag.n();
        let mut m = [ZERO; 4];
        for i in 0..n {
            m[i * n + i] = ONE;
        }
        GroupElement { tag, entries: m }
    }

    pub fn n(&self) -> usize {
        self.tag.n()
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.n() + c]
    }

    pub fn as_value(&self) -> LieValue {
        LieValue { tag: self.tag, entries: self.entries }
    }

    pub fn det(&self) -> Complex64 {
        self.as_value().det()
    }

    /// Deviation from the group constraints: |g|=1 for U(1); unitarity and
    /// unit determinant for SU(2); nothing for GL(n, C).
    pub fn constraint_defect(&self) -> f64 {
        match self.tag {
            AlgebraTag::U1 => (self.entries[0].norm() - 1.0).abs(),
            AlgebraTag::Su2 => {
                let v = self.as_value();
                let u = mat_mul(&v.dagger(), &v);
                let mut id = u;
                id.entries[0] -= ONE;
                id.entries[3] -= ONE;
                id.max_abs_entry().max((self.det() - ONE).norm())
            }
            AlgebraTag::GlnC(_) => 0.0,
        }
    }

    pub fn mul(&self, rhs: &GroupElement) -> GroupElement {
        assert_eq!(self.tag, rhs.tag, "algebra mismatch");
        let m = mat_mul(&self.as_value(), &rhs.as_value());
        GroupElement { tag: self.tag, entries: m.entries }
    }

    pub fn inverse(&self) -> GroupElement {
        match self.tag {
            AlgebraTag::U1 => {
                let mut m = [ZERO; 4];
                m[0] = self.entries[0].conj() / self.entries[0].norm_sqr();
                GroupElement { tag: self.tag, entries: m }
            }
            AlgebraTag::Su2 => {
                // Unitary: inverse is the conjugate transpose.
                GroupElement { tag: self.tag, entries: self.as_value().dagger().entries }
            }
            AlgebraTag::GlnC(1) => {
                let mut m = [ZERO; 4];
                m[0] = ONE / self.entries[0];
                GroupElement { tag: self.tag, entries: m }
            }
            AlgebraTag::GlnC(_) => {
                let d = self.det();
                let [a, b, c, dd] = self.entries;
                let m = [dd / d, -b / d, -c / d, a / d];
                GroupElement { tag: self.tag, entries: m }
            }
        }
    }

    /// Distance to another element in the operator norm.
    pub fn op_distance(&self, rhs: &GroupElement) -> f64 {
        (self.as_value() - rhs.as_value()).op_norm()
    }

    /// Project a raw matrix onto the group manifold: phase normalization for
    /// U(1), polar projection plus determinant correction for SU(2).
    pub fn project(tag: AlgebraTag, raw: &LieValue) -> GroupElement {
        match tag {
            AlgebraTag::U1 => {
                let z = raw.entries[0];
                let mut m = [ZERO; 4];
                m[0] = if z.norm() > 0.0 { z / z.norm() } else { ONE };
                GroupElement { tag, entries: m }
            }
            AlgebraTag::Su2 => {
                // Newton iteration for the unitary polar factor, then rotate
                // the determinant back to 1.
                let mut x = raw.retag(AlgebraTag::GlnC(2));
                for _ in 0..3 {
                    let xg = GroupElement { tag: AlgebraTag::GlnC(2), entries: x.entries };
                    let xinv_dag = xg.inverse().as_value().dagger();
                    x = (x + xinv_dag) * 0.5;
                }
                let d = x.det();
                // det of a unitary 2x2 lies on the unit circle; take the
                // principal square root and divide it out.
                let s = d.sqrt();
                let mut m = x.entries;
                for e in &mut m {
                    *e /= s;
                }
                GroupElement { tag, entries: m }
            }
            AlgebraTag::GlnC(_) => GroupElement { tag, entries: raw.entries },
        }
    }
}

/// Matrix exponential, with closed forms for each tag.
pub fn exp(a: &LieValue) -> GroupElement {
    match a.tag {
        AlgebraTag::U1 | AlgebraTag::GlnC(1) => {
            let mut m = [ZERO; 4];
            m[0] = a.entries[0].exp();
            GroupElement { tag: a.tag, entries: m }
        }
        AlgebraTag::Su2 => {
            // a^2 = -theta^2 I with theta^2 = det a >= 0, so
            // exp(a) = cos(theta) I + sinc(theta) a (Rodrigues form).
            let theta2 = a.det().re.max(0.0);
            let theta = theta2.sqrt();
            let (c, s) = (theta.cos(), sinc(theta));
            let mut m = (*a * s).entries;
            m[0] += Complex64::new(c, 0.0);
            m[3] += Complex64::new(c, 0.0);
            GroupElement { tag: a.tag, entries: m }
        }
        AlgebraTag::GlnC(2) => {
            // exp(A) = e^{mu} (cosh(delta) I + sinhc(delta) (A - mu I)),
            // mu = tr A / 2, delta^2 = mu^2 - det A.
            let mu = a.trace() / 2.0;
            let delta = (mu * mu - a.det()).sqrt();
            let (ch, shc) = (delta.cosh(), sinhc(delta));
            let mut n = a.entries;
            n[0] -= mu;
            n[3] -= mu;
            let mut m = [ZERO; 4];
            for (i, e) in n.iter().enumerate() {
                m[i] = shc * e;
            }
            m[0] += ch;
            m[3] += ch;
            let scale = mu.exp();
            for e in &mut m {
                *e *= scale;
            }
            GroupElement { tag: a.tag, entries: m }
        }
        AlgebraTag::GlnC(_) => panic!("unsupported matrix size"),
    }
}

/// Principal matrix logarithm. Errors at branch points (SU(2): trace = -2;
/// scalars: the cut (-inf, 0]).
pub fn log(g: &GroupElement) -> Result<LieValue> {
    match g.tag {
        AlgebraTag::U1 => {
            let z = g.entries[0];
            if z.norm() == 0.0 {
                return Err(Error::LogBranchPoint);
            }
            Ok(LieValue::u1(z.arg()))
        }
        AlgebraTag::Su2 => {
            let v = g.as_value();
            let c = (v.trace().re / 2.0).clamp(-1.0, 1.0);
            let h = ((v - v.dagger()) * 0.5).structural_projection();
            let s = h.det().re.max(0.0).sqrt(); // |sin theta|
            if 1.0 + c <= 1e-10 {
                return Err(Error::LogBranchPoint);
            }
            let theta = s.atan2(c);
            if s < 1e-12 {
                Ok(h)
            } else {
                Ok(h * (theta / s))
            }
        }
        AlgebraTag::GlnC(1) => scalar_log(g.entries[0]).map(LieValue::scalar),
        AlgebraTag::GlnC(2) => gl2_log(g),
        AlgebraTag::GlnC(_) => panic!("unsupported matrix size"),
    }
}

fn scalar_log(z: Complex64) -> Result<Complex64> {
    if z.norm() < 1e-300 || (z.re < 0.0 && z.im.abs() <= 1e-12 * z.norm()) {
        return Err(Error::LogBranchPoint);
    }
    Ok(z.ln())
}

fn gl2_log(g: &GroupElement) -> Result<LieValue> {
    let v = g.as_value();
    let tr = v.trace();
    let det = v.det();
    let half = tr / 2.0;
    let disc = (half * half - det).sqrt();
    let (l1, l2) = (half + disc, half - disc);
    let scale = v.max_abs_entry().max(1.0);
    if disc.norm() > 1e-8 * scale {
        // Diagonalizable: log = V diag(ln l) V^{-1}.
        let (w1, w2) = (scalar_log(l1)?, scalar_log(l2)?);
        let ev = |l: Complex64| -> [Complex64; 2] {
            let r1 = [v.entries[1], l - v.entries[0]];
            let r2 = [l - v.entries[3], v.entries[2]];
            let n1 = r1[0].norm() + r1[1].norm();
            let n2 = r2[0].norm() + r2[1].norm();
            if n1 >= n2 {
                r1
            } else {
                r2
            }
        };
        let v1 = ev(l1);
        let v2 = ev(l2);
        let dv = v1[0] * v2[1] - v2[0] * v1[1];
        if dv.norm() < 1e-14 * scale * scale {
            return Err(Error::LogBranchPoint);
        }
        let m = [
            (w1 * v1[0] * v2[1] - w2 * v2[0] * v1[1]) / dv,
            (w2 - w1) * v1[0] * v2[0] / dv,
            (w1 - w2) * v1[1] * v2[1] / dv,
            (w2 * v1[0] * v2[1] - w1 * v2[0] * v1[1]) / dv,
        ];
        Ok(LieValue { tag: g.tag, entries: m })
    } else {
        // Nearly defective: log(mu I + N) = ln(mu) I + N/mu - N^2/(2 mu^2).
        let w = scalar_log(half)?;
        let mut n = v.entries;
        n[0] -= half;
        n[3] -= half;
        let nv = LieValue { tag: g.tag, entries: n };
        let n2 = mat_mul(&nv, &nv);
        let mut m = [ZERO; 4];
        for i in 0..4 {
            m[i] = n[i] / half - n2.entries[i] / (2.0 * half * half);
        }
        m[0] += w;
        m[3] += w;
        Ok(LieValue { tag: g.tag, entries: m })
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        ONE + z * z / 6.0 + z * z * z * z / 120.0
    } else {
        z.sinh() / z
    }
}
