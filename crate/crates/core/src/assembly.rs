//! Dense object-blocked interaction matrices `M(κ)`, `M∞(κ)` and `∂M/∂z`.
//!
//! Matrices are stored in the conditioned form `κ² M`, i.e. entries
//! `∬ [κ² f_a·f_b + div f_a div f_b] g_κ`. The scale factor is kept with the
//! matrix so weak-form entries can be recovered.

use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};

use faer::{Mat, MatRef};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::kernel::{classify_pair, pair_moments, slot_block, Kernel, PanelRules, SurfaceData};
use crate::meshio::{RwgBasisSet, Vec3};
use crate::xi_quadrature::QuadratureSpec;

/// Default refusal threshold for the basis dimension.
pub const MAX_BASIS: usize = 6000;

/// Panels per parallel batch; results are scattered in batch order.
const ROW_BATCH: usize = 32;

/// Dense symmetric `M(κ)` or its infinite-separation variant.
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    matrix: Mat<f64>,
    blocks: Vec<(usize, usize)>,
    kappa: f64,
    scale: f64,
    infinite: bool,
}

fn validate_layout(matrix: &Mat<f64>, blocks: &[(usize, usize)], kappa: f64) -> Result<()> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    let mut next = 0;
    for &(offset, size) in blocks {
        if offset != next || size == 0 {
            return Err(Error::InvalidArgument("blocks must tile the matrix in order".into()));
        }
        next += size;
    }
    if next != matrix.nrows() {
        return Err(Error::InvalidArgument("blocks do not cover the matrix".into()));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("κ must be positive and finite, got {kappa}")));
    }
    Ok(())
}

impl InteractionMatrix {
    /// Wrap a dense symmetric matrix given in weak-form scale.
    pub fn from_dense(matrix: Mat<f64>, blocks: Vec<(usize, usize)>, kappa: f64, infinite: bool) -> Result<Self> {
        validate_layout(&matrix, &blocks, kappa)?;
        let out = InteractionMatrix {
            matrix,
            blocks,
            kappa,
            scale: 1.0,
            infinite,
        };
        if out.asymmetry() > 1e-10 {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        if infinite {
            for i in 0..out.blocks.len() {
                for j in 0..out.blocks.len() {
                    let b = out.block(i, j);
                    if i != j && (0..b.nrows()).any(|r| (0..b.ncols()).any(|c| b[(r, c)] != 0.0)) {
                        return Err(Error::InvalidArgument("M∞ must have zero inter-object blocks".into()));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    /// `(offset, size)` of every object block.
    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Factor between the stored entries and the weak-form entries.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Whether inter-object blocks were zeroed.
    pub fn is_infinite(&self) -> bool {
        self.infinite
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Weak-form entry `M_ab`.
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.matrix[(a, b)] / self.scale
    }

    /// Block `(i, j)` of the stored matrix.
    pub fn block(&self, i: usize, j: usize) -> MatRef<'_, f64> {
        let (ri, ni) = self.blocks[i];
        let (rj, nj) = self.blocks[j];
        self.matrix.as_ref().submatrix(ri, rj, ni, nj)
    }

    /// The same matrix multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {c}")));
        }
        let mut out = self.clone();
        out.matrix = Mat::from_fn(self.dimension(), self.dimension(), |i, j| c * self.matrix[(i, j)]);
        out.scale *= c;
        Ok(out)
    }

    /// `max |M_ab - M_ba| / max |M_ab|`.
    pub fn asymmetry(&self) -> f64 {
        asymmetry(self.matrix.as_ref())
    }

    /// Write the weak-form matrix as text, one row per line, 17 significant digits.
    pub fn write_text(&self, out: &mut impl Write) -> Result<()> {
        let n = self.dimension();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", self.entry(i, j))).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_text(&mut file)?;
        file.flush()?;
        Ok(())
    }
}

/// `∂M/∂δ` for object `object` moved by `δ · direction`, same layout and
/// scale as the matching [`InteractionMatrix`].
#[derive(Debug, Clone)]
pub struct MatrixDerivative {
    matrix: Mat<f64>,
    blocks: Vec<(usize, usize)>,
    kappa: f64,
    scale: f64,
    object: usize,
    direction: Vec3,
}

impl MatrixDerivative {
    /// Wrap a dense derivative matrix given in weak-form scale.
    pub fn from_dense(matrix: Mat<f64>, blocks: Vec<(usize, usize)>, kappa: f64, object: usize, direction: Vec3) -> Result<Self> {
        validate_layout(&matrix, &blocks, kappa)?;
        if object >= blocks.len() {
            return Err(Error::InvalidArgument(format!("object index {object} out of range")));
        }
        Ok(MatrixDerivative {
            matrix,
            blocks,
            kappa,
            scale: 1.0,
            object,
            direction,
        })
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn object(&self) -> usize {
        self.object
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Unscaled entry `∂M_ab/∂δ`.
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.matrix[(a, b)] / self.scale
    }

    pub fn block(&self, i: usize, j: usize) -> MatRef<'_, f64> {
        let (ri, ni) = self.blocks[i];
        let (rj, nj) = self.blocks[j];
        self.matrix.as_ref().submatrix(ri, rj, ni, nj)
    }

    /// The same derivative multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {c}")));
        }
        let mut out = self.clone();
        out.matrix = Mat::from_fn(self.dimension(), self.dimension(), |i, j| c * self.matrix[(i, j)]);
        out.scale *= c;
        Ok(out)
    }
}

fn asymmetry(m: MatRef<'_, f64>) -> f64 {
    let n = m.nrows();
    let (mut diff, mut size) = (0.0f64, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            diff = diff.max((m[(i, j)] - m[(j, i)]).abs());
            size = size.max(m[(i, j)].abs());
        }
    }
    if size == 0.0 {
        0.0
    } else {
        diff / size
    }
}

struct CachedBlock {
    basis: Arc<RwgBasisSet>,
    kappa: f64,
    block: Arc<Mat<f64>>,
}

/// Matrix builder holding the panel rules and a cache of self-blocks.
///
/// A self-block depends only on the untransformed mesh and `κ`, so it is
/// computed once per basis and reused across objects, configurations and
/// the `M`/`M∞` pair.
pub struct Assembler {
    rules: PanelRules,
    max_basis: usize,
    cache: Mutex<Vec<CachedBlock>>,
    cache_limit: usize,
}

impl std::fmt::Debug for Assembler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Assembler")
            .field("max_basis", &self.max_basis)
            .field("cache_limit", &self.cache_limit)
            .finish_non_exhaustive()
    }
}

impl Assembler {
    pub fn new(rules: PanelRules) -> Self {
        Assembler {
            rules,
            max_basis: MAX_BASIS,
            cache: Mutex::new(Vec::new()),
            cache_limit: 1 << 30,
        }
    }

    pub fn from_spec(spec: &QuadratureSpec) -> Result<Self> {
        let mut a = Self::new(spec.panel_rules()?);
        a.max_basis = spec.max_basis;
        Ok(a)
    }

    /// Bytes of self-block storage kept between calls; 0 disables the cache.
    pub fn with_cache_limit(mut self, bytes: usize) -> Self {
        self.cache_limit = bytes;
        self
    }

    pub fn with_max_basis(mut self, n: usize) -> Self {
        self.max_basis = n;
        self
    }

    pub fn rules(&self) -> &PanelRules {
        &self.rules
    }

    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }

    fn check(&self, config: &Configuration, kappa: f64) -> Result<()> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("κ must be positive and finite, got {kappa}")));
        }
        let n = config.dimension();
        if n > self.max_basis {
            return Err(Error::TooLarge { n, limit: self.max_basis });
        }
        Ok(())
    }

    fn self_block(&self, basis: &Arc<RwgBasisSet>, kappa: f64) -> Result<Arc<Mat<f64>>> {
        {
            let cache = self.cache.lock().unwrap();
            if let Some(c) = cache.iter().find(|c| Arc::ptr_eq(&c.basis, basis) && c.kappa == kappa) {
                return Ok(c.block.clone());
            }
        }
        let surface = SurfaceData::new(basis.mesh().clone(), basis.clone(), &self.rules);
        let block = Arc::new(pair_block(&surface, &surface, true, &Kernel::Value { kappa }, kappa * kappa, &self.rules)?);
        let mut cache = self.cache.lock().unwrap();
        let bytes: usize = cache.iter().map(|c| 8 * c.block.nrows() * c.block.ncols()).sum();
        if bytes + 8 * block.nrows() * block.ncols() <= self.cache_limit {
            cache.push(CachedBlock {
                basis: basis.clone(),
                kappa,
                block: block.clone(),
            });
        }
        Ok(block)
    }

    fn layout(config: &Configuration) -> Vec<(usize, usize)> {
        (0..config.len()).map(|i| config.block(i)).collect()
    }

    fn block_diagonal(&self, config: &Configuration, kappa: f64) -> Result<InteractionMatrix> {
        self.check(config, kappa)?;
        let n = config.dimension();
        let mut matrix = Mat::zeros(n, n);
        for (i, object) in config.objects().iter().enumerate() {
            let block = self.self_block(object.basis(), kappa)?;
            let (offset, size) = config.block(i);
            matrix.as_mut().submatrix_mut(offset, offset, size, size).copy_from(block.as_ref());
        }
        Ok(InteractionMatrix {
            matrix,
            blocks: Self::layout(config),
            kappa,
            scale: kappa * kappa,
            infinite: true,
        })
    }

    /// `M∞(κ)`: self-blocks only.
    pub fn assemble_inf(&self, config: &Configuration, kappa: f64) -> Result<InteractionMatrix> {
        self.block_diagonal(config, kappa)
    }

    /// `M(κ)` over every basis pair.
    pub fn assemble(&self, config: &Configuration, kappa: f64) -> Result<InteractionMatrix> {
        Ok(self.assemble_pair(config, kappa)?.0)
    }

    /// `M(κ)` and `M∞(κ)` sharing their self-blocks.
    pub fn assemble_pair(&self, config: &Configuration, kappa: f64) -> Result<(InteractionMatrix, InteractionMatrix)> {
        let inf = self.block_diagonal(config, kappa)?;
        let mut full = inf.clone();
        full.infinite = false;
        let surfaces = self.surfaces(config);
        let kernel = Kernel::Value { kappa };
        for i in 0..config.len() {
            for j in i + 1..config.len() {
                let block = pair_block(&surfaces[i], &surfaces[j], false, &kernel, kappa * kappa, &self.rules)?;
                place_mirrored(&mut full.matrix, config.block(i), config.block(j), &block);
            }
        }
        let asym = full.asymmetry();
        assert!(asym <= 1e-10, "assembled matrix is not symmetric ({asym:e})");
        Ok((full, inf))
    }

    /// `∂M/∂δ` for object `object` moved by `δ · direction`.
    pub fn assemble_dz(&self, config: &Configuration, object: usize, direction: Vec3, kappa: f64) -> Result<MatrixDerivative> {
        self.check(config, kappa)?;
        if config.len() < 2 {
            return Err(Error::InvalidArgument("a force needs at least two objects".into()));
        }
        if object >= config.len() {
            return Err(Error::InvalidArgument(format!("object index {object} out of range")));
        }
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("displacement direction must be a nonzero vector".into()));
        }
        let direction = direction / norm;
        let n = config.dimension();
        let mut matrix = Mat::zeros(n, n);
        let surfaces = self.surfaces(config);
        let kernel = Kernel::Derivative { kappa, direction };
        for j in 0..config.len() {
            if j == object {
                continue;
            }
            // rows belong to the moving object, so x in the kernel moves
            let block = pair_block(&surfaces[object], &surfaces[j], false, &kernel, kappa * kappa, &self.rules)?;
            place_mirrored(&mut matrix, config.block(object), config.block(j), &block);
        }
        Ok(MatrixDerivative {
            matrix,
            blocks: Self::layout(config),
            kappa,
            scale: kappa * kappa,
            object,
            direction,
        })
    }

    fn surfaces(&self, config: &Configuration) -> Vec<SurfaceData> {
        config
            .objects()
            .iter()
            .map(|o| SurfaceData::new(o.placed().clone(), o.basis().clone(), &self.rules))
            .collect()
    }
}

/// Write `block` at `(rows, cols)` and its transpose at `(cols, rows)`.
fn place_mirrored(m: &mut Mat<f64>, rows: (usize, usize), cols: (usize, usize), block: &Mat<f64>) {
    m.as_mut().submatrix_mut(rows.0, cols.0, rows.1, cols.1).copy_from(block.as_ref());
    m.as_mut().submatrix_mut(cols.0, rows.0, cols.1, rows.1).copy_from(block.as_ref().transpose());
}

/// Basis-level block between surfaces `a` and `b`, scaled as `ff · (f·f term) + (div term)`.
///
/// With `same` set the two surfaces are the same object: only panel pairs
/// `pb >= pa` are integrated and mirrored, and the result is symmetric.
fn pair_block(a: &SurfaceData, b: &SurfaceData, same: bool, kernel: &Kernel, ff: f64, rules: &PanelRules) -> Result<Mat<f64>> {
    let (na, nb) = (a.basis().len(), b.basis().len());
    let mut out = Mat::<f64>::zeros(na, nb);
    let panels_a = a.mesh().panels();
    let panels_b = b.mesh().panels();
    let rows: Vec<usize> = (0..panels_a.len()).collect();
    for batch in rows.chunks(ROW_BATCH) {
        let computed: Vec<Vec<(usize, [[f64; 3]; 3])>> = batch
            .par_iter()
            .map(|&pa| {
                let start = if same { pa } else { 0 };
                (start..panels_b.len())
                    .map(|pb| {
                        let class = classify_pair(&panels_a[pa], &panels_b[pb], same);
                        let m = pair_moments(a, pa, b, pb, class, kernel, rules)?;
                        Ok((pb, slot_block(&m, a.slots(pa), b.slots(pb), ff, 1.0)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (&pa, row) in batch.iter().zip(computed) {
            let sa = a.slots(pa);
            for (pb, mut blk) in row {
                let sb = b.slots(pb);
                if same && pa == pb {
                    for k in 0..3 {
                        for l in 0..k {
                            let mean = 0.5 * (blk[k][l] + blk[l][k]);
                            blk[k][l] = mean;
                            blk[l][k] = mean;
                        }
                    }
                }
                for k in 0..3 {
                    for l in 0..3 {
                        let (alpha, beta) = (sa.basis[k], sb.basis[l]);
                        out[(alpha, beta)] += blk[k][l];
                        if same && pa != pb {
                            out[(beta, alpha)] += blk[k][l];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `M(κ)` with default settings from `quad`.
pub fn assemble(config: &Configuration, kappa: f64, quad: &QuadratureSpec) -> Result<InteractionMatrix> {
    Assembler::from_spec(quad)?.assemble(config, kappa)
}

/// `M∞(κ)` with settings from `quad`.
pub fn assemble_inf(config: &Configuration, kappa: f64, quad: &QuadratureSpec) -> Result<InteractionMatrix> {
    Assembler::from_spec(quad)?.assemble_inf(config, kappa)
}

/// `∂M/∂z` for object `object` moved along `+z`.
pub fn assemble_dz(config: &Configuration, object: usize, kappa: f64, quad: &QuadratureSpec) -> Result<MatrixDerivative> {
    Assembler::from_spec(quad)?.assemble_dz(config, object, Vec3::z(), kappa)
}
