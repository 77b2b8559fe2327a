//! Uniform tensor grid on a rectangle with homogeneous Dirichlet boundary,
//! complex fields on its interior nodes, the discrete L2 pairing, and the
//! field file format.
//!
//! Conventions fixed here and inherited by every other module:
//! * storage is row-major with x fastest: node (i, j) lives at `j * nx + i`;
//! * boundary nodes are eliminated, node (i, j) sits at
//!   `(xmin + (i+1) hx, ymin + (j+1) hy)`;
//! * quadrature is the rectangle rule with weight `hx * hy` per node;
//! * complex inner products are conjugate-linear in the first slot.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{GpError, Result};
use crate::par;

/// Discrete rectangular domain: interior nodes of a uniform tensor grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    hx: f64,
    hy: f64,
}

impl Grid {
    /// Interior grid with `nx * ny` nodes on `[xmin, xmax] x [ymin, ymax]`.
    ///
    /// Panics if either axis has fewer than 3 interior nodes or the bounds
    /// are not strictly increasing.
    pub fn new(nx: usize, ny: usize, xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        assert!(nx >= 3 && ny >= 3, "need at least 3 interior nodes per axis");
        assert!(
            xmax > xmin && ymax > ymin,
            "domain bounds must be strictly increasing"
        );
        Self {
            nx,
            ny,
            xmin,
            xmax,
            ymin,
            ymax,
            hx: (xmax - xmin) / (nx + 1) as f64,
            hy: (ymax - ymin) / (ny + 1) as f64,
        }
    }

    /// Square grid on `[-half, half]^2` with `n` interior nodes per axis.
    pub fn square(n: usize, half: f64) -> Self {
        Self::new(n, n, -half, half, -half, half)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Total number of interior nodes.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn ymin(&self) -> f64 {
        self.ymin
    }

    pub fn ymax(&self) -> f64 {
        self.ymax
    }

    /// Quadrature weight of one node.
    pub fn cell_weight(&self) -> f64 {
        self.hx * self.hy
    }

    /// Supremum of |r| over the closed domain.
    pub fn diag_radius(&self) -> f64 {
        let mx = self.xmin.powi(2).max(self.xmax.powi(2));
        let my = self.ymin.powi(2).max(self.ymax.powi(2));
        (mx + my).sqrt()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.xmin + (i + 1) as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.ymin + (j + 1) as f64 * self.hy
    }

    /// Node coordinates of flat index `k`.
    #[inline]
    pub fn coords(&self, k: usize) -> (f64, f64) {
        (self.x(k % self.nx), self.y(k / self.nx))
    }
}

/// Complex-valued function sampled at the interior nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GpError::ShapeMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![Complex64::ZERO; grid.len()],
            grid,
        }
    }

    /// Sample `f(x, y)` at every interior node.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let mut values = vec![Complex64::ZERO; grid.len()];
        par::fill_with(&mut values, |k| {
            let (x, y) = grid.coords(k);
            f(x, y)
        });
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `self + a * other`, in place.
    pub fn axpy(&mut self, a: Complex64, other: &Field) {
        assert_same_grid(self, other);
        par::axpy(a, &other.values, &mut self.values);
    }

    pub fn scale(&mut self, a: Complex64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: Complex64) -> Field {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// Entrywise |u|^2 as a real vector.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

#[inline]
pub(crate) fn assert_same_grid(u: &Field, v: &Field) {
    assert!(
        u.grid == v.grid,
        "fields live on different grids: {}x{} vs {}x{}",
        u.grid.nx,
        u.grid.ny,
        v.grid.nx,
        v.grid.ny
    );
}

/// Discrete L2 pairing `hx*hy * sum conj(u_k) v_k`, conjugate-linear in `u`.
///
/// Panics if the fields live on different grids.
pub fn l2_inner(u: &Field, v: &Field) -> Complex64 {
    assert_same_grid(u, v);
    u.grid.cell_weight() * par::dot(&u.values, &v.values)
}

/// Discrete L2 norm.
pub fn mass(u: &Field) -> f64 {
    l2_inner(u, u).re.max(0.0).sqrt()
}

/// Rescale to unit mass. Direction is unchanged; the zero field is rejected.
pub fn retract(v: &Field) -> Result<Field> {
    let m = mass(v);
    if m == 0.0 {
        return Err(GpError::ZeroField);
    }
    Ok(v.scaled(Complex64::new(1.0 / m, 0.0)))
}

/// Write a field in the text format below; `load_field` is the inverse.
///
/// ```text
/// # gpflow-field nx=<nx> ny=<ny> xmin=<..> xmax=<..> ymin=<..> ymax=<..>
/// <x>,<y>,<re>,<im>          (nx*ny lines, storage order)
/// ```
///
/// All floats carry 17 significant digits so the round trip is bitwise.
pub fn save_field(u: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let g = &u.grid;
    writeln!(
        w,
        "# gpflow-field nx={} ny={} xmin={} xmax={} ymin={} ymax={}",
        g.nx,
        g.ny,
        fmt_f64(g.xmin),
        fmt_f64(g.xmax),
        fmt_f64(g.ymin),
        fmt_f64(g.ymax)
    )?;
    let mut line = String::with_capacity(96);
    for (k, v) in u.values.iter().enumerate() {
        let (x, y) = g.coords(k);
        line.clear();
        let _ = write!(
            line,
            "{},{},{},{}",
            fmt_f64(x),
            fmt_f64(y),
            fmt_f64(v.re),
            fmt_f64(v.im)
        );
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Decimal with 17 significant digits; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn load_field(path: &Path) -> Result<Field> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| GpError::FieldFormat("empty file".into()))??;
    let grid = parse_header(&header)?;

    let mut values = Vec::with_capacity(grid.len());
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| {
                    GpError::FieldFormat(format!("line {}: missing {name}", lineno + 2))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| GpError::FieldFormat(format!("line {}: {name}: {e}", lineno + 2)))
        };
        let _x = next("x")?;
        let _y = next("y")?;
        let re = next("re")?;
        let im = next("im")?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != grid.len() {
        return Err(GpError::FieldFormat(format!(
            "header promises {} values ({}x{}), file holds {}",
            grid.len(),
            grid.nx,
            grid.ny,
            values.len()
        )));
    }
    Field::new(grid, values)
}

fn parse_header(header: &str) -> Result<Grid> {
    let body = header
        .strip_prefix("# gpflow-field")
        .ok_or_else(|| GpError::FieldFormat("missing '# gpflow-field' header".into()))?;
    let mut nx = None;
    let mut ny = None;
    let mut xmin = None;
    let mut xmax = None;
    let mut ymin = None;
    let mut ymax = None;
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| GpError::FieldFormat(format!("bad header token '{token}'")))?;
        let bad = |e| GpError::FieldFormat(format!("header {key}: {e}"));
        match key {
            "nx" => nx = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "ny" => ny = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "xmin" => xmin = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "xmax" => xmax = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "ymin" => ymin = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "ymax" => ymax = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            other => {
                return Err(GpError::FieldFormat(format!("unknown header key '{other}'")));
            }
        }
    }
    let miss = |k: &str| GpError::FieldFormat(format!("header missing '{k}'"));
    Ok(Grid::new(
        nx.ok_or_else(|| miss("nx"))?,
        ny.ok_or_else(|| miss("ny"))?,
        xmin.ok_or_else(|| miss("xmin"))?,
        xmax.ok_or_else(|| miss("xmax"))?,
        ymin.ok_or_else(|| miss("ymin"))?,
        ymax.ok_or_else(|| miss("ymax"))?,
    ))
}
