//! 3-tensor representation of skew-symmetric matrix spaces: slices,
//! transforms, characterization tuples, semi-canonical forms, and the
//! tensor isometry driver.

use crate::error::{Error, Result};
use crate::gf::{solve_left, FpMatrix, Prime, RowSpace, RowVector, VectorCounter};
use crate::lowrank::{kernel_general, kernel_skew, AttributeSet};
use crate::reduction::{self, SemicDecision};
use crate::seed::Seed;
use crate::space::{semi_canonical_basis, MatrixSpace, TieBreak, DEFAULT_ENUM_CAP};
use crate::tuples::TupleBudget;
use rand::Rng;

/// A 3-tensor G in F_p^{m x n x n}, skew in the last two indices, whose m
/// frontal slices are linearly independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewTensor {
    p: Prime,
    m: usize,
    n: usize,
    data: Vec<u64>,
}

impl SkewTensor {
    pub fn new(p: Prime, m: usize, n: usize, data: Vec<u64>) -> Result<SkewTensor> {
        if data.len() != m * n * n {
            return Err(Error::ShapeMismatch("tensor data length mismatch".into()));
        }
        let t = SkewTensor { p, m, n, data };
        for i in 0..m {
            if !t.x_slice(i).is_skew() {
                return Err(Error::NotSkew(format!("slice {i} is not skew-symmetric")));
            }
        }
        if t.x_slice_stack().rank() != m {
            return Err(Error::ShapeMismatch("tensor slices are linearly dependent".into()));
        }
        Ok(t)
    }

    /// Tensor of a skew space: slice i is the i-th canonical basis matrix.
    pub fn from_space(space: &MatrixSpace) -> Result<SkewTensor> {
        if !space.is_skew() {
            return Err(Error::NotSkew("tensor_from_space requires a skew space".into()));
        }
        let n = space.col_dim();
        let m = space.dim();
        let mut data = Vec::with_capacity(m * n * n);
        for b in space.basis() {
            data.extend_from_slice(b.vectorize().as_slice());
        }
        SkewTensor::new(space.p(), m, n, data)
    }

    pub fn from_slices(p: Prime, slices: &[FpMatrix]) -> Result<SkewTensor> {
        let m = slices.len();
        let n = if m == 0 { 0 } else { slices[0].rows() };
        let mut data = Vec::with_capacity(m * n * n);
        for s in slices {
            if s.rows() != n || s.cols() != n {
                return Err(Error::ShapeMismatch("slices must be square of one size".into()));
            }
            data.extend_from_slice(s.vectorize().as_slice());
        }
        SkewTensor::new(p, m, n, data)
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        self.data[i * self.n * self.n + j * self.n + k]
    }

    /// X_i: the n x n slice with X_i[j, k] = G[i, j, k].
    pub fn x_slice(&self, i: usize) -> FpMatrix {
        let nn = self.n * self.n;
        FpMatrix::from_vec(self.p, self.n, self.n, self.data[i * nn..(i + 1) * nn].to_vec())
    }

    /// Y_j: the m x n slice with Y_j[i, k] = G[i, j, k].
    pub fn y_slice(&self, j: usize) -> FpMatrix {
        let mut out = FpMatrix::zero(self.p, self.m, self.n);
        for i in 0..self.m {
            for k in 0..self.n {
                out.set(i, k, self.get(i, j, k));
            }
        }
        out
    }

    /// Z_k: the m x n slice with Z_k[i, j] = G[i, j, k].
    pub fn z_slice(&self, k: usize) -> FpMatrix {
        let mut out = FpMatrix::zero(self.p, self.m, self.n);
        for i in 0..self.m {
            for j in 0..self.n {
                out.set(i, j, self.get(i, j, k));
            }
        }
        out
    }

    pub fn x_slices(&self) -> Vec<FpMatrix> {
        (0..self.m).map(|i| self.x_slice(i)).collect()
    }

    pub fn y_slices(&self) -> Vec<FpMatrix> {
        (0..self.n).map(|j| self.y_slice(j)).collect()
    }

    fn x_slice_stack(&self) -> FpMatrix {
        let rows: Vec<RowVector> = (0..self.m).map(|i| self.x_slice(i).vectorize()).collect();
        if rows.is_empty() {
            FpMatrix::zero(self.p, 0, self.n * self.n)
        } else {
            FpMatrix::from_rows(self.p, &rows)
        }
    }

    fn y_slice_stack(&self) -> FpMatrix {
        let rows: Vec<RowVector> = (0..self.n).map(|j| self.y_slice(j).vectorize()).collect();
        FpMatrix::from_rows(self.p, &rows)
    }

    /// The skew matrix space spanned by the X slices.
    pub fn x_space(&self) -> MatrixSpace {
        MatrixSpace::span_from_generators(self.p, self.n, self.n, &self.x_slices())
            .expect("slices share a shape")
    }

    /// The matrix space spanned by the Y slices.
    pub fn y_space(&self) -> MatrixSpace {
        MatrixSpace::span_from_generators(self.p, self.m, self.n, &self.y_slices())
            .expect("slices share a shape")
    }

    /// True iff for every nonzero row vector v there is a slice A with
    /// v A nonzero; equivalently the stacked slices have no left kernel.
    pub fn is_nondegenerate(&self) -> bool {
        if self.m == 0 {
            return self.n == 0;
        }
        let mut stack = self.x_slice(0);
        for i in 1..self.m {
            stack = stack.hstack(&self.x_slice(i));
        }
        stack.left_nullspace().rows() == 0
    }

    /// Coefficients of a matrix over the X slices, if in their span.
    pub fn x_coordinates(&self, mat: &FpMatrix) -> Option<RowVector> {
        let stack = self.x_slice_stack();
        solve_left(&stack, &mat.vectorize()).map(|s| s.particular)
    }

    /// Coefficients of a matrix over the Y slices; unique only when the
    /// tensor is nondegenerate.
    pub fn y_coordinates(&self, mat: &FpMatrix) -> Option<RowVector> {
        let stack = self.y_slice_stack();
        solve_left(&stack, &mat.vectorize()).map(|s| s.particular)
    }
}

/// trans_{N, M}(G): slice i of the result is sum_{i'} M[i, i'] (N X_{i'} N^T).
pub fn transform(g: &SkewTensor, n_mat: &FpMatrix, m_mat: &FpMatrix) -> Result<SkewTensor> {
    if !n_mat.is_invertible() || !m_mat.is_invertible() {
        return Err(Error::Singular);
    }
    if n_mat.rows() != g.n() || m_mat.rows() != g.m() {
        return Err(Error::ShapeMismatch("transform shapes do not match the tensor".into()));
    }
    let p = g.p();
    let nt = n_mat.transpose();
    let conjugated: Vec<FpMatrix> = (0..g.m()).map(|i| n_mat.mul(&g.x_slice(i)).mul(&nt)).collect();
    let mut slices = Vec::with_capacity(g.m());
    for i in 0..g.m() {
        let mut acc = FpMatrix::zero(p, g.n(), g.n());
        for (ip, c) in conjugated.iter().enumerate() {
            let coef = m_mat.get(i, ip);
            if coef != 0 {
                acc = acc.add_scaled(c, coef);
            }
        }
        slices.push(acc);
    }
    SkewTensor::from_slices(p, &slices)
}

/// The individualization, attribute-set, and complementary data pinning

/// down a semi-canonical form of a tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterizationTuple {
    /// Left individualization for the X space; the right one is its
    /// transpose.
    pub l_skew: FpMatrix,
    /// Left individualization for the Y space (right one is l_skew^T).
    pub l: FpMatrix,
    /// Attribute set over the column space F_p^n.
    pub lambda: AttributeSet,
    /// Complementary matrix for ker_skew(X_G, Lambda).
    pub c_skew: FpMatrix,
    /// Complementary matrix for ker(Y_G, Lambda).
    pub c: FpMatrix,
}

/// Kernels computed while validating a tuple against a tensor.
#[derive(Debug, Clone)]
pub struct TupleContext {
    /// ker_skew(X_G, Lambda), a subspace of F_p^n.
    pub kernel_x: RowSpace,
    /// ker(Y_G, Lambda), a subspace of F_p^m.
    pub kernel_y: RowSpace,
}

impl CharacterizationTuple {
    /// Checks the tuple invariants against a tensor and returns the kernels.
    pub fn validate(&self, g: &SkewTensor) -> Result<TupleContext> {
        let p = g.p();
        let n = g.n();
        let m = g.m();
        if self.l_skew.cols() != n {
            return Err(Error::InvalidTuple("l_skew must have n columns".into()));
        }
        if self.l.cols() != m {
            return Err(Error::InvalidTuple("l must have m columns".into()));
        }
        if self.lambda.ambient() != n || self.lambda.p() != p {
            return Err(Error::InvalidTuple("attribute set must live in F_p^n".into()));
        }
        let x_space = g.x_space();
        let y_space = g.y_space();
        let kernel_x = kernel_skew(&x_space, &self.lambda)?;
        let kernel_y = kernel_general(&y_space, &self.lambda)?;

        // c_skew: full rank, complementary to kernel_x, leading rows
        // orthogonal to Lambda
        let kx = kernel_x.dim();
        if self.c_skew.rows() != n - kx || self.c_skew.cols() != n {
            return Err(Error::InvalidTuple(format!(
                "c_skew is {}x{}, expected {}x{}",
                self.c_skew.rows(),
                self.c_skew.cols(),
                n - kx,
                n
            )));
        }
        if self.c_skew.rank() != self.c_skew.rows() {
            return Err(Error::InvalidTuple("c_skew is not full rank".into()));
        }
        let c_skew_space = RowSpace::from_matrix(&self.c_skew);
        if kernel_x.intersect(&c_skew_space).dim() != 0 {
            return Err(Error::InvalidTuple("c_skew meets ker_skew(X, Lambda)".into()));
        }
        let orth_rows = n - kx - self.lambda.len().min(n - kx);
        let orth_rows = orth_rows.min(self.c_skew.rows());
        for r in 0..orth_rows {
            for x in self.lambda.vectors() {
                if x.dot(&self.c_skew.row(r)) != 0 {
                    return Err(Error::InvalidTuple(format!(
                        "c_skew row {r} is not orthogonal to the attribute set"
                    )));
                }
            }
        }

        // c: full rank, complementary to kernel_y
        let ky = kernel_y.dim();
        if self.c.rows() != m - ky || self.c.cols() != m {
            return Err(Error::InvalidTuple(format!(
                "c is {}x{}, expected {}x{}",
                self.c.rows(),
                self.c.cols(),
                m - ky,
                m
            )));
        }
        if self.c.rank() != self.c.rows() {
            return Err(Error::InvalidTuple("c is not full rank".into()));
        }
        let c_space = RowSpace::from_matrix(&self.c);
        if kernel_y.intersect(&c_space).dim() != 0 {
            return Err(Error::InvalidTuple("c meets ker(Y, Lambda)".into()));
        }
        Ok(TupleContext { kernel_x, kernel_y })
    }

    /// Builds a tuple from individualizations and an attribute set using
    /// canonical complementary matrices.
    pub fn canonical(
        g: &SkewTensor,
        l_skew: FpMatrix,
        l: FpMatrix,
        lambda: AttributeSet,
    ) -> Result<CharacterizationTuple> {
        let x_space = g.x_space();
        let y_space = g.y_space();
        let kernel_x = kernel_skew(&x_space, &lambda)?;
        let kernel_y = kernel_general(&y_space, &lambda)?;
        let c_skew =
            crate::lowrank::complementary_for_kernel_skew(g.p(), g.n(), &kernel_x, &lambda)?;
        let c = crate::lowrank::complementary_for_kernel_general(g.p(), g.m(), &kernel_y)?;
        Ok(CharacterizationTuple { l_skew, l, lambda, c_skew, c })
    }

    /// The trivial tuple: identity individualizations and empty attribute
    /// set. Its semi-canonical form is the tensor itself.
    pub fn trivial(g: &SkewTensor) -> Result<CharacterizationTuple> {
        CharacterizationTuple::canonical(
            g,
            FpMatrix::identity(g.p(), g.n()),
            FpMatrix::identity(g.p(), g.m()),
            AttributeSet::empty(g.p(), g.n()),
        )
    }

    /// The image tuple under an isometry: if trans_{N0, M0}(G) = H and this
    /// tuple is valid for G, the derived tuple is valid for H.
    pub fn image(&self, n0: &FpMatrix, m0: &FpMatrix) -> Result<CharacterizationTuple> {
        let n0i = n0.invert()?;
        let m0i = m0.invert()?;
        Ok(CharacterizationTuple {
            l_skew: self.l_skew.mul(&n0i),
            l: self.l.mul(&m0i),
            lambda: self.lambda.transformed(&n0.transpose())?,
            c_skew: self.c_skew.mul(&n0i),
            c: self.c.mul(&m0i),
        })
    }
}

/// The four parameters of a semi-canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemiCanonicalParams {
    pub alpha_x: usize,
    pub beta_x: usize,
    pub alpha_y: usize,
    pub beta_y: usize,
}

impl SemiCanonicalParams {
    /// m' = alpha_X + beta_X.
    pub fn m_prime(&self) -> usize {
        self.alpha_x + self.beta_x
    }

    /// n' = alpha_Y + beta_Y.
    pub fn n_prime(&self) -> usize {
        self.alpha_y + self.beta_y
    }
}

/// A semi-canonical form semic(G) = trans_{N, M}(G) together with its
/// construction data.
#[derive(Debug, Clone)]
pub struct SemiCanonicalForm {
    pub tensor: SkewTensor,
    pub params: SemiCanonicalParams,
    pub n_mat: FpMatrix,
    pub m_mat: FpMatrix,
    pub tuple: CharacterizationTuple,
}

/// Constructs a semi-canonical form of `g` with respect to `tuple`.
///
/// Rows 1..=alpha_Y+beta_Y of N are the coefficient vectors of a
/// semi-canonical basis of the Y-slice combinations over ker_skew(X_G,
/// Lambda); the remaining rows are the complementary matrix. M is built the
/// same way from the X-slice combinations over ker(Y_G, Lambda). The zero
/// pattern of the result is verified before returning.
pub fn build_semi_canonical_form(
    g: &SkewTensor,
    tuple: &CharacterizationTuple,
    tie: TieBreak,
    cap: u64,
) -> Result<SemiCanonicalForm> {
    let p = g.p();
    let n = g.n();
    let m = g.m();
    if !g.is_nondegenerate() {
        return Err(Error::Degenerate(
            "semi-canonical construction requires a nondegenerate tensor".into(),
        ));
    }
    let ctx = tuple.validate(g)?;

    // X-slice combinations over ker(Y_G, Lambda)
    let xk_mats: Vec<FpMatrix> = ctx
        .kernel_y
        .basis()
        .iter()
        .map(|v| combine(p, n, n, g.x_slices().as_slice(), v))
        .collect();
    let xk = MatrixSpace::span_from_generators(p, n, n, &xk_mats)?;
    if xk.dim() != ctx.kernel_y.dim() {
        return Err(Error::ConstructionFailed("X-slice combinations collapsed".into()));
    }
    let sc_x = semi_canonical_basis(&xk, &tuple.l_skew, &tuple.l_skew.transpose(), tie, cap)?;
    let alpha_x = sc_x.zero_dim;
    let beta_x = xk.dim() - alpha_x;

    // Y-slice combinations over ker_skew(X_G, Lambda)
    let yk_mats: Vec<FpMatrix> = ctx
        .kernel_x
        .basis()
        .iter()
        .map(|v| combine(p, m, n, g.y_slices().as_slice(), v))
        .collect();
    let yk = MatrixSpace::span_from_generators(p, m, n, &yk_mats)?;
    if yk.dim() != ctx.kernel_x.dim() {
        return Err(Error::ConstructionFailed("Y-slice combinations collapsed".into()));
    }
    let sc_y = semi_canonical_basis(&yk, &tuple.l, &tuple.l_skew.transpose(), tie, cap)?;
    let alpha_y = sc_y.zero_dim;
    let beta_y = yk.dim() - alpha_y;

    // M: coefficient rows of the X semi-canonical basis, then C
    let mut m_rows: Vec<RowVector> = Vec::with_capacity(m);
    for el in &sc_x.elements {
        let coeffs = g
            .x_coordinates(el)
            .ok_or_else(|| Error::ConstructionFailed("X coefficient extraction failed".into()))?;
        m_rows.push(coeffs);
    }
    for r in 0..tuple.c.rows() {
        m_rows.push(tuple.c.row(r));
    }
    let m_mat = FpMatrix::from_rows(p, &m_rows);
    if !m_mat.is_invertible() {
        return Err(Error::ConstructionFailed("stacked M rows are not invertible".into()));
    }

    // N: coefficient rows of the Y semi-canonical basis, then C_skew
    let mut n_rows: Vec<RowVector> = Vec::with_capacity(n);
    for el in &sc_y.elements {
        let coeffs = g
            .y_coordinates(el)
            .ok_or_else(|| Error::ConstructionFailed("Y coefficient extraction failed".into()))?;
        n_rows.push(coeffs);
    }
    for r in 0..tuple.c_skew.rows() {
        n_rows.push(tuple.c_skew.row(r));
    }
    let n_mat = FpMatrix::from_rows(p, &n_rows);
    if !n_mat.is_invertible() {
        return Err(Error::ConstructionFailed("stacked N rows are not invertible".into()));
    }

    let params = SemiCanonicalParams { alpha_x, beta_x, alpha_y, beta_y };
    let tensor = transform(g, &n_mat, &m_mat)?;
    verify_zero_pattern(&tensor, params)?;
    Ok(SemiCanonicalForm { tensor, params, n_mat, m_mat, tuple: tuple.clone() })
}

fn combine(p: Prime, rows: usize, cols: usize, mats: &[FpMatrix], coeffs: &RowVector) -> FpMatrix {
    let mut acc = FpMatrix::zero(p, rows, cols);
    for (i, c) in coeffs.as_slice().iter().enumerate() {
        if *c != 0 {
            acc = acc.add_scaled(&mats[i], *c);
        }
    }
    acc
}

/// Checks the three zero regions of a semi-canonical form.
pub fn verify_zero_pattern(t: &SkewTensor, params: SemiCanonicalParams) -> Result<()> {
    let np = params.n_prime();
    for i in 0..params.alpha_x {
        for j in 0..np {
            for k in 0..np {
                if t.get(i, j, k) != 0 {
                    return Err(Error::InvalidForm(format!(
                        "region 1 violated at ({i}, {j}, {k})"
                    )));
                }
            }
        }
    }
    for i in 0..params.m_prime() {
        for j in 0..params.alpha_y {
            for k in 0..np {
                if t.get(i, j, k) != 0 {
                    return Err(Error::InvalidForm(format!(
                        "region 2 violated at ({i}, {j}, {k})"
                    )));
                }
            }
        }
        for j in 0..np {
            for k in 0..params.alpha_y {
                if t.get(i, j, k) != 0 {
                    return Err(Error::InvalidForm(format!(
                        "region 3 violated at ({i}, {j}, {k})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Outcome of an isometry decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// Isometric, with a verified witness: trans_{N, M}(G) = H.
    Isometric { n_wit: FpMatrix, m_wit: FpMatrix },
    NotIsometric,
    /// Could not be decided within the configured bounds and budgets.
    Inconclusive { reason: String },
}

impl Decision {
    pub fn is_isometric(&self) -> bool {
        matches!(self, Decision::Isometric { .. })
    }
}

/// Enumeration bounds for characterization tuples, mirroring the driver's
/// size parameters: l1 rows for L_skew, l2 rows for L, attribute sets up to
/// l3 vectors, complementary matrices up to l4 rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub l1: usize,
    pub l2: usize,
    pub l3: usize,
    pub l4: usize,
}

impl Bounds {
    /// Sizes that guarantee completeness of the enumeration, with unit
    /// constants: l1 = max(m, n) log2(p) / n^0.2, l2 = n log2(p) / n^0.2,
    /// l3 = n^0.4, l4 = n^0.8.
    pub fn guaranteed(p: Prime, n: usize, m: usize) -> Bounds {
        let logp = (p.get() as f64).log2();
        let nf = n as f64;
        Bounds {
            l1: ((m.max(n) as f64) * logp / nf.powf(0.2)).ceil() as usize,
            l2: (nf * logp / nf.powf(0.2)).ceil() as usize,
            l3: nf.powf(0.4).ceil() as usize,
            l4: nf.powf(0.8).ceil() as usize,
        }
    }
}

/// Shared knobs for the pipeline.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub tie: TieBreak,
    /// Cap for semi-canonical basis enumerations.
    pub enum_cap: u64,
    pub tuple_budget: TupleBudget,
    /// Member budget for the rank-profile precheck (0 disables it).
    pub rank_profile_budget: u64,
    /// Cap on restricted-form candidates during witness recovery.
    pub witness_recovery_cap: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            tie: TieBreak::LexMin,
            enum_cap: DEFAULT_ENUM_CAP,
            tuple_budget: TupleBudget::default(),
            rank_profile_budget: 100_000,
            witness_recovery_cap: 5_000_000,
        }
    }
}

/// How the isometry driver chooses characterization tuples.
#[derive(Debug, Clone)]
pub enum Mode {
    /// The caller supplies a tuple for G and a claimed isometry (N0, M0);
    /// the tuple for H is the derived image tuple. A NotIsometric answer
    /// certifies only that the supplied correspondence does not extend.
    Guided { tuple: CharacterizationTuple, n0: FpMatrix, m0: FpMatrix },
    /// Seeded sampling of tuple pairs within the bounds. Sound for yes
    /// answers; exhaustion yields Inconclusive unless an invariant already
    /// separates the tensors.
    Enumerate { bounds: Bounds, candidates: usize, seed: Seed, strict: bool },
}

#[derive(Debug, Clone)]
pub struct IsometryConfig {
    pub mode: Mode,
    pub options: PipelineOptions,
}

/// Decides isometry of two tensors of the same shape.
pub fn tensor_isometry(g: &SkewTensor, h: &SkewTensor, config: &IsometryConfig) -> Result<Decision> {
    if g.p() != h.p() || g.m() != h.m() || g.n() != h.n() {
        return Err(Error::ShapeMismatch("tensors must share (p, m, n)".into()));
    }
    let opts = &config.options;
    // rank profile is an isometry invariant
    if opts.rank_profile_budget > 0 {
        let gs = g.x_space();
        let hs = h.x_space();
        if let (Ok(rg), Ok(rh)) = (
            gs.rank_profile(opts.rank_profile_budget),
            hs.rank_profile(opts.rank_profile_budget),
        ) {
            if rg != rh {
                return Ok(Decision::NotIsometric);
            }
        }
    }
    match &config.mode {
        Mode::Guided { tuple, n0, m0 } => guided_decision(g, h, tuple, n0, m0, opts),
        Mode::Enumerate { bounds, candidates, seed, strict } => {
            enumerate_decision(g, h, *bounds, *candidates, *seed, *strict, opts)
        }
    }
}

fn guided_decision(
    g: &SkewTensor,
    h: &SkewTensor,
    tuple: &CharacterizationTuple,
    n0: &FpMatrix,
    m0: &FpMatrix,
    opts: &PipelineOptions,
) -> Result<Decision> {
    tuple.validate(g)?;
    let image = tuple.image(n0, m0)?;
    if image.validate(h).is_err() {
        // the claimed correspondence does not even transport the tuple
        return Ok(Decision::NotIsometric);
    }
    let sc_g = build_semi_canonical_form(g, tuple, opts.tie, opts.enum_cap)?;
    let sc_h = build_semi_canonical_form(h, &image, opts.tie, opts.enum_cap)?;
    decide_on_forms(g, h, &sc_g, &sc_h, opts)
}

fn enumerate_decision(
    g: &SkewTensor,
    h: &SkewTensor,
    bounds: Bounds,
    candidates: usize,
    seed: Seed,
    strict: bool,
    opts: &PipelineOptions,
) -> Result<Decision> {
    let needed = Bounds::guaranteed(g.p(), g.n(), g.m());
    let covers = bounds.l1 >= needed.l1
        && bounds.l2 >= needed.l2
        && bounds.l3 >= needed.l3
        && bounds.l4 >= needed.l4;
    if strict && !covers {
        return Err(Error::BoundsTooSmall(format!(
            "bounds {bounds:?} below the guaranteed sizes {needed:?}"
        )));
    }
    let g_tuples = sample_tuples(g, bounds, candidates, seed.child(1));
    let h_tuples = sample_tuples(h, bounds, candidates, seed.child(2));
    for (gi, tg) in g_tuples.iter().enumerate() {
        let Ok(sc_g) = build_semi_canonical_form(g, tg, opts.tie, opts.enum_cap) else {
            continue;
        };
        for (hi, th) in h_tuples.iter().enumerate() {
            let _ = (gi, hi);
            let Ok(sc_h) = build_semi_canonical_form(h, th, opts.tie, opts.enum_cap) else {
                continue;
            };
            match decide_on_forms(g, h, &sc_g, &sc_h, opts)? {
                Decision::Isometric { n_wit, m_wit } => {
                    return Ok(Decision::Isometric { n_wit, m_wit })
                }
                _ => continue,
            }
        }
    }
    // Sampling exhausted. The enumeration is not provably complete at these
    // sizes, so a no answer cannot be certified.
    Ok(Decision::Inconclusive {
        reason: format!(
            "no witness found among {} x {} sampled tuple pairs at bounds {:?}",
            candidates, candidates, bounds
        ),
    })
}

/// Seeded candidate tuples: the trivial tuple first, then randomized
/// individualizations with attribute sets of every size up to the bound.
fn sample_tuples(
    g: &SkewTensor,
    bounds: Bounds,
    count: usize,
    seed: Seed,
) -> Vec<CharacterizationTuple> {
    let p = g.p();
    let n = g.n();
    let m = g.m();
    let mut out = Vec::with_capacity(count);
    if let Ok(t) = CharacterizationTuple::trivial(g) {
        out.push(t);
    }
    let mut rng = seed.rng();
    let mut attempts = 0;
    while out.len() < count && attempts < 20 * count {
        attempts += 1;
        let l1 = bounds.l1.clamp(1, n.max(1));
        let l2 = bounds.l2.clamp(1, m.max(1));
        let l_skew = FpMatrix::random(p, l1, n, &mut rng);
        let l = FpMatrix::random(p, l2, m, &mut rng);
        let lam_size = rng.gen_range(0..=bounds.l3.min(n));
        let mut vs: Vec<RowVector> = Vec::new();
        let mut span = RowSpace::empty(p, n);
        while vs.len() < lam_size {
            let v = RowVector::new(p, (0..n).map(|_| rng.gen_range(0..p.get())).collect());
            if span.insert(&v) {
                vs.push(v);
            }
        }
        let Ok(lambda) = AttributeSet::new(p, n, vs) else {
            continue;
        };
        if let Ok(t) = CharacterizationTuple::canonical(g, l_skew, l, lambda) {
            if t.c_skew.rows() <= bounds.l4 && t.c.rows() <= bounds.l4 {
                out.push(t);
            }
        }
    }
    out
}

/// Runs the semi-canonical form comparison and, on a yes answer, recovers
/// and verifies a tensor-level witness.
fn decide_on_forms(
    g: &SkewTensor,
    h: &SkewTensor,
    sc_g: &SemiCanonicalForm,
    sc_h: &SemiCanonicalForm,
    opts: &PipelineOptions,
) -> Result<Decision> {
    if sc_g.params != sc_h.params {
        return Ok(Decision::NotIsometric);
    }
    match reduction::semic_isometry(sc_g, sc_h, &opts.tuple_budget)? {
        SemicDecision::NotIsometric => Ok(Decision::NotIsometric),
        SemicDecision::Isometric { restricted } => {
            let pair = match restricted {
                Some((n_dag, m_dag)) => Some((n_dag, m_dag)),
                None => recover_restricted_witness(sc_g, sc_h, opts.witness_recovery_cap)?,
            };
            match pair {
                Some((n_dag, m_dag)) => {
                    // compose: H = trans(N_H^{-1} N_dag N_G, M_H^{-1} M_dag M_G)(G)
                    let n_wit = sc_h.n_mat.invert()?.mul(&n_dag).mul(&sc_g.n_mat);
                    let m_wit = sc_h.m_mat.invert()?.mul(&m_dag).mul(&sc_g.m_mat);
                    let image = transform(g, &n_wit, &m_wit)?;
                    if &image == h {
                        Ok(Decision::Isometric { n_wit, m_wit })
                    } else {
                        Err(Error::ConstructionFailed(
                            "recovered witness failed verification".into(),
                        ))
                    }
                }
                None => Ok(Decision::Inconclusive {
                    reason: "isometric by the reduction, but witness recovery exceeded its cap"
                        .into(),
                }),
            }
        }
    }
}

/// Exhaustive search for a restricted-form pair (N, M) with
/// trans_{N, M}(semic(G)) = semic(H). N ranges over the block form
/// [[X', 0, 0], [Y', I, 0], [0, 0, I]]; M is then forced by the independent
/// slices and only checked for the matching form.
fn recover_restricted_witness(
    sc_g: &SemiCanonicalForm,
    sc_h: &SemiCanonicalForm,
    cap: u64,
) -> Result<Option<(FpMatrix, FpMatrix)>> {
    let p = sc_g.tensor.p();
    let n = sc_g.tensor.n();
    let m = sc_g.tensor.m();
    let pr = sc_g.params;
    let ay = pr.alpha_y;
    let by = pr.beta_y;
    let free = ay * ay + by * ay;
    match (p.get() as u128).checked_pow(free as u32) {
        Some(total) if total <= cap as u128 => {}
        _ => return Ok(None),
    }
    for v in VectorCounter::new(p, free) {
        let mut n_dag = FpMatrix::identity(p, n);
        let mut idx = 0;
        for i in 0..ay {
            for j in 0..ay {
                n_dag.set(i, j, v.get(idx));
                idx += 1;
            }
        }
        for i in 0..by {
            for j in 0..ay {
                n_dag.set(ay + i, j, v.get(idx));
                idx += 1;
            }
        }
        if n_dag.submatrix(0, ay, 0, ay).rank() != ay {
            continue;
        }
        // M is forced: slice i of semic(H) must be sum M[i, i'] (N X_i' N^T)
        let nt = n_dag.transpose();
        let conj: Vec<FpMatrix> =
            (0..m).map(|i| n_dag.mul(&sc_g.tensor.x_slice(i)).mul(&nt)).collect();
        let rows: Vec<RowVector> = conj.iter().map(|c| c.vectorize()).collect();
        let stack = FpMatrix::from_rows(p, &rows);
        let mut m_rows: Vec<RowVector> = Vec::with_capacity(m);
        let mut ok = true;
        for i in 0..m {
            match solve_left(&stack, &sc_h.tensor.x_slice(i).vectorize()) {
                Some(s) => m_rows.push(s.particular),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let m_dag = FpMatrix::from_rows(p, &m_rows);
        if !restricted_form_ok(&m_dag, pr.alpha_x, pr.beta_x) || !m_dag.is_invertible() {
            continue;
        }
        let image = transform(&sc_g.tensor, &n_dag, &m_dag)?;
        if image == sc_h.tensor {
            return Ok(Some((n_dag, m_dag)));
        }
    }
    Ok(None)
}

/// Checks the block shape [[X, 0, 0], [Y, I_beta, 0], [0, 0, I_rest]].
fn restricted_form_ok(m: &FpMatrix, alpha: usize, beta: usize) -> bool {
    let d = m.rows();
    for i in 0..d {
        for j in 0..d {
            let v = m.get(i, j);
            if i < alpha {
                if j >= alpha && v != 0 {
                    return false;
                }
            } else if i < alpha + beta {
                if j >= alpha {
                    let want = if i == j { 1 } else { 0 };
                    if v != want {
                        return false;
                    }
                }
            } else {
                let want = if i == j { 1 } else { 0 };
                if v != want {
                    return false;
                }
            }
        }
    }
    true
}

/// The canonical tensor of the span of a tensor's slices, together with the
/// coefficient matrix C such that the result equals trans_{I, C}(raw).
pub fn canonical_retensor(raw: &SkewTensor) -> Result<(SkewTensor, FpMatrix)> {
    let space = raw.x_space();
    if space.dim() != raw.m() {
        return Err(Error::ShapeMismatch("tensor slices are dependent".into()));
    }
    let canon = SkewTensor::from_space(&space)?;
    let rows: Vec<RowVector> = (0..canon.m())
        .map(|i| {
            raw.x_coordinates(&canon.x_slice(i)).expect("canonical slice lies in the span")
        })
        .collect();
    let c = FpMatrix::from_rows(raw.p(), &rows);
    debug_assert_eq!(transform(raw, &FpMatrix::identity(raw.p(), raw.n()), &c)?, canon);
    Ok((canon, c))
}

/// Decides isometry of two skew matrix spaces: an invertible S with
/// S * A * S^T = B as spaces. Spaces of unequal dimension are never
/// isometric; otherwise the decision is delegated to the tensors of the
/// canonical bases, so a guided transport must refer to those tensors.
pub fn space_isometry(
    a: &MatrixSpace,
    b: &MatrixSpace,
    config: &IsometryConfig,
) -> Result<Decision> {
    if !a.is_skew() || !b.is_skew() {
        return Err(Error::NotSkew("space isometry requires skew spaces".into()));
    }
    if a.p() != b.p() || a.col_dim() != b.col_dim() {
        return Err(Error::ShapeMismatch("spaces must share p and ambient dimension".into()));
    }
    if a.dim() != b.dim() {
        return Ok(Decision::NotIsometric);
    }
    if a.dim() == 0 {
        let id = FpMatrix::identity(a.p(), a.col_dim());
        return Ok(Decision::Isometric { n_wit: id.clone(), m_wit: FpMatrix::identity(a.p(), 0) });
    }
    let ta = SkewTensor::from_space(a)?;
    let tb = SkewTensor::from_space(b)?;
    tensor_isometry(&ta, &tb, config)
}

/// Samples a tensor with independent slices; `require_fact` additionally
/// enforces the nondegeneracy needed by the group construction.
pub fn random_tensor(
    p: Prime,
    n: usize,
    m: usize,
    seed: Seed,
    require_fact: bool,
) -> Result<SkewTensor> {
    let mut rng = seed.rng();
    for _ in 0..10_000 {
        let slices: Vec<FpMatrix> = (0..m)
            .map(|_| {
                let a = FpMatrix::random(p, n, n, &mut rng);
                a.sub(&a.transpose())
            })
            .collect();
        let Ok(t) = SkewTensor::from_slices(p, &slices) else {
            continue;
        };
        if !require_fact || t.is_nondegenerate() {
            return Ok(t);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no valid {n}x{n} tensor of dimension {m} found; the shape may admit none"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn heisenberg(p: Prime) -> SkewTensor {
        SkewTensor::from_slices(p, &[FpMatrix::from_i64(p, &[&[0, 1], &[-1, 0]])]).unwrap()
    }

    #[test]
    fn tensor_from_space_transcription() {
        let p = p3();
        let j = FpMatrix::from_i64(p, &[&[0, 1], &[-1, 0]]);
        let s = MatrixSpace::span_from_generators(p, 2, 2, &[j]).unwrap();
        let t = SkewTensor::from_space(&s).unwrap();
        assert_eq!((t.m(), t.n()), (1, 2));
        assert_eq!(t.get(0, 0, 1), 1);
        assert_eq!(t.get(0, 1, 0), 2); // -1 mod 3

        // round trip: span of the X slices is the space
        let back = t.x_space();
        assert!(back.same_space(&s));
    }

    #[test]
    fn tensor_nonzero_count() {
        let p = p3();
        // basis E12 - E21, E13 - E31 of a 2-dim space of 3x3 skew matrices
        let a = FpMatrix::from_i64(p, &[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
        let b = FpMatrix::from_i64(p, &[&[0, 0, 1], &[0, 0, 0], &[-1, 0, 0]]);
        let s = MatrixSpace::span_from_generators(p, 3, 3, &[a, b]).unwrap();
        let t = SkewTensor::from_space(&s).unwrap();
        let nonzero = (0..2)
            .flat_map(|i| (0..3).flat_map(move |j| (0..3).map(move |k| (i, j, k))))
            .filter(|&(i, j, k)| t.get(i, j, k) != 0)
            .count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn slice_consistency() {
        let p = p3();
        let t = random_tensor(p, 3, 2, Seed(1), false).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(t.x_slice(i).get(j, k), t.get(i, j, k));
                    assert_eq!(t.y_slice(j).get(i, k), t.get(i, j, k));
                    assert_eq!(t.z_slice(k).get(i, j), t.get(i, j, k));
                    // Y_j = -Z_j
                    assert_eq!(t.y_slice(j).get(i, k), p3().neg(t.z_slice(j).get(i, k)));
                }
            }
        }
    }

    #[test]
    fn transform_identity_and_composition() {
        let p = p3();
        let t = random_tensor(p, 2, 1, Seed(2), false).unwrap();
        let id = transform(&t, &FpMatrix::identity(p, 2), &FpMatrix::identity(p, 1)).unwrap();
        assert_eq!(id, t);

        let mut rng = Seed(3).rng();
        for _ in 0..50 {
            let g = random_tensor(p, 2, 1, Seed(rng.gen()), false).unwrap();
            let n1 = FpMatrix::random_invertible(p, 2, &mut rng);
            let n2 = FpMatrix::random_invertible(p, 2, &mut rng);
            let m1 = FpMatrix::random_invertible(p, 1, &mut rng);
            let m2 = FpMatrix::random_invertible(p, 1, &mut rng);
            let lhs = transform(&g, &n1.mul(&n2), &m1.mul(&m2)).unwrap();
            let rhs = transform(&transform(&g, &n2, &m2).unwrap(), &n1, &m1).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn transform_diag_example() {
        let p = p3();
        let t = heisenberg(p);
        let n = FpMatrix::from_i64(p, &[&[1, 0], &[0, 2]]);
        let m = FpMatrix::identity(p, 1);
        let out = transform(&t, &n, &m).unwrap();
        assert_eq!(out.x_slice(0), FpMatrix::from_i64(p, &[&[0, 2], &[-2, 0]]));
    }

    #[test]
    fn trivial_tuple_gives_tensor_itself() {
        let p = p3();
        let t = heisenberg(p);
        let tup = CharacterizationTuple::trivial(&t).unwrap();
        let sc = build_semi_canonical_form(&t, &tup, TieBreak::LexMin, 100_000).unwrap();
        assert_eq!(sc.params, SemiCanonicalParams { alpha_x: 0, beta_x: 0, alpha_y: 0, beta_y: 0 });
        assert_eq!(sc.tensor, t);
        assert_eq!(sc.n_mat, FpMatrix::identity(p, 2));
        assert_eq!(sc.m_mat, FpMatrix::identity(p, 1));
    }

    #[test]
    fn guided_roundtrip_isometric() {
        let p = p3();
        let mut rng = Seed(4).rng();
        for trial in 0..20 {
            let g = random_tensor(p, 2, 1, Seed(100 + trial), true).unwrap();
            let n0 = FpMatrix::random_invertible(p, 2, &mut rng);
            let m0 = FpMatrix::random_invertible(p, 1, &mut rng);
            let h = transform(&g, &n0, &m0).unwrap();
            let tup = CharacterizationTuple::trivial(&g).unwrap();
            let cfg = IsometryConfig {
                mode: Mode::Guided { tuple: tup, n0: n0.clone(), m0: m0.clone() },
                options: PipelineOptions::default(),
            };
            match tensor_isometry(&g, &h, &cfg).unwrap() {
                Decision::Isometric { n_wit, m_wit } => {
                    assert_eq!(transform(&g, &n_wit, &m_wit).unwrap(), h);
                }
                other => panic!("expected isometric, got {other:?}"),
            }
        }
    }

    #[test]
    fn guided_self_is_isometric_with_identity() {
        let p = p3();
        let g = heisenberg(p);
        let tup = CharacterizationTuple::trivial(&g).unwrap();
        let cfg = IsometryConfig {
            mode: Mode::Guided {
                tuple: tup,
                n0: FpMatrix::identity(p, 2),
                m0: FpMatrix::identity(p, 1),
            },
            options: PipelineOptions::default(),
        };
        match tensor_isometry(&g, &g, &cfg).unwrap() {
            Decision::Isometric { n_wit, m_wit } => {
                assert_eq!(transform(&g, &n_wit, &m_wit).unwrap(), g);
            }
            other => panic!("expected isometric, got {other:?}"),
        }
    }

    #[test]
    fn image_tuple_identity_is_noop() {
        let p = p3();
        let g = random_tensor(p, 3, 2, Seed(5), true).unwrap();
        let tup = CharacterizationTuple::trivial(&g).unwrap();
        let img = tup.image(&FpMatrix::identity(p, 3), &FpMatrix::identity(p, 2)).unwrap();
        assert_eq!(tup, img);
    }

    #[test]
    fn guided_pipeline_kernels_match_under_transport() {
        let p = p3();
        let mut rng = Seed(6).rng();
        for trial in 0..10 {
            let g = random_tensor(p, 3, 2, Seed(300 + trial), true).unwrap();
            // a tuple with a nontrivial attribute set
            let lambda = AttributeSet::new(
                p,
                3,
                vec![RowVector::new(p, vec![1, 0, 0])],
            )
            .unwrap();
            let l_skew = FpMatrix::random(p, 1, 3, &mut rng);
            let l = FpMatrix::random(p, 1, 2, &mut rng);
            let Ok(tup) = CharacterizationTuple::canonical(&g, l_skew, l, lambda) else {
                continue;
            };
            let n0 = FpMatrix::random_invertible(p, 3, &mut rng);
            let m0 = FpMatrix::random_invertible(p, 2, &mut rng);
            let h = transform(&g, &n0, &m0).unwrap();
            let img = tup.image(&n0, &m0).unwrap();
            let sc_g = build_semi_canonical_form(&g, &tup, TieBreak::LexMin, 100_000).unwrap();
            let sc_h = build_semi_canonical_form(&h, &img, TieBreak::LexMin, 100_000).unwrap();
            assert_eq!(sc_g.params, sc_h.params);
            // kernels of the two forms agree entrywise
            let pr = sc_g.params;
            for i in 0..pr.m_prime() {
                for j in 0..pr.n_prime() {
                    for k in 0..pr.n_prime() {
                        assert_eq!(sc_g.tensor.get(i, j, k), sc_h.tensor.get(i, j, k));
                    }
                }
            }
        }
    }

    #[test]
    fn rank_profile_separates() {
        let p = p3();
        // rank profile differs: nondegenerate 1-dim space vs 2-dim space
        let g = heisenberg(p);
        let a = FpMatrix::from_i64(p, &[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
        let b = FpMatrix::from_i64(p, &[&[0, 0, 1], &[0, 0, 0], &[-1, 0, 0]]);
        let h = SkewTensor::from_slices(p, &[a, b]).unwrap();
        assert_ne!(
            g.x_space().rank_profile(1000).unwrap(),
            h.x_space().rank_profile(1000).unwrap()
        );
    }

    #[test]
    fn nondegeneracy_detection() {
        let p = p3();
        assert!(heisenberg(p).is_nondegenerate());
        // a 3x3 slice of rank 2 has a radical
        let a = FpMatrix::from_i64(p, &[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
        let t = SkewTensor::from_slices(p, &[a]).unwrap();
        assert!(!t.is_nondegenerate());
    }

    #[test]
    fn loader_rejects_non_skew() {
        let p = p3();
        let bad = vec![0, 1, 1, 0]; // symmetric, not skew
        assert!(matches!(SkewTensor::new(p, 1, 2, bad), Err(Error::NotSkew(_))));
    }
}
