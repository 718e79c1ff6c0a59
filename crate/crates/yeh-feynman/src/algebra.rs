//! Cylinder functionals `F(x) = sum_j c_j exp{i <u_j, x>}` represented by
//! finitely supported complex measures, and the measure-level calculus on
//! them: evaluation, the generalized Fourier-Yeh-Feynman transform, the
//! generalized convolution product, and scaled pointwise products.
//!
//! Every operation here acts on the atom list: transforms multiply weights by
//! unit-modulus phases, convolutions pair atoms. Both sides of each identity
//! checked in [`crate::checks`] therefore reduce to finite sums, which is what
//! makes exact (non-statistical) verification possible.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::sheet::{pwz_integral, SheetPath};

const SQRT_2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One atom of a discrete complex measure on `L2(Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAtom {
    pub weight: Complex64,
    pub atom: GridFunction,
}

/// A finitely supported complex measure: a list of weighted atoms on one grid.
/// The empty list is the zero measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    grid: GridSpec,
    atoms: Vec<WeightedAtom>,
}

impl DiscreteMeasure {
    pub fn new(grid: &GridSpec, atoms: Vec<WeightedAtom>) -> Result<Self> {
        for a in &atoms {
            grid.check_same(a.atom.grid(), "measure atom")?;
            if !a.weight.re.is_finite() || !a.weight.im.is_finite() {
                return Err(Error::NonFinite("measure weight is not finite".into()));
            }
        }
        Ok(Self { grid: *grid, atoms })
    }

    pub fn zero(grid: &GridSpec) -> Self {
        Self { grid: *grid, atoms: Vec::new() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn atoms(&self) -> &[WeightedAtom] {
        &self.atoms
    }

    pub fn weights(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    /// Total variation `sum_j |c_j|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.norm()).sum()
    }

    /// Measure addition: concatenated atom lists.
    pub fn merged(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        self.grid.check_same(&other.grid, "measure merge")?;
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(DiscreteMeasure { grid: self.grid, atoms })
    }

    /// Maintenance pass: merge atoms whose profiles agree cellwise within
    /// `tol`, summing their weights. Convolutions grow atom lists
    /// multiplicatively; compacting affects size only, never values.
    pub fn compacted(&self, tol: f64) -> DiscreteMeasure {
        let mut kept: Vec<WeightedAtom> = Vec::with_capacity(self.atoms.len());
        'outer: for a in &self.atoms {
            for k in kept.iter_mut() {
                let close = k
                    .atom
                    .values()
                    .iter()
                    .zip(a.atom.values())
                    .all(|(x, y)| (x - y).abs() <= tol);
                if close {
                    k.weight += a.weight;
                    continue 'outer;
                }
            }
            kept.push(a.clone());
        }
        DiscreteMeasure { grid: self.grid, atoms: kept }
    }
}

/// An element of the Banach algebra `S(L2(Q))`, wrapping its defining measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunctional {
    measure: DiscreteMeasure,
}

impl CylinderFunctional {
    pub fn new(measure: DiscreteMeasure) -> Self {
        Self { measure }
    }

    /// Convenience constructor from `(weight, atom)` pairs.
    pub fn from_atoms(grid: &GridSpec, atoms: Vec<(Complex64, GridFunction)>) -> Result<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(weight, atom)| WeightedAtom { weight, atom })
            .collect();
        Ok(Self { measure: DiscreteMeasure::new(grid, atoms)? })
    }

    /// The functional `exp{i <u, .>}`: unit mass at a single atom.
    pub fn unit_mass(atom: GridFunction) -> Self {
        let grid = *atom.grid();
        Self {
            measure: DiscreteMeasure {
                grid,
                atoms: vec![WeightedAtom { weight: Complex64::new(1.0, 0.0), atom }],
            },
        }
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn grid(&self) -> &GridSpec {
        self.measure.grid()
    }

    pub fn total_variation(&self) -> f64 {
        self.measure.total_variation()
    }

    /// `F(y) = sum_j c_j exp{i <u_j, y>}`. Bounded by the total variation.
    pub fn evaluate(&self, y: &SheetPath) -> Result<Complex64> {
        self.measure.grid().check_same(y.grid(), "evaluate")?;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in self.measure.atoms() {
            let theta = pwz_integral(&a.atom, y).expect("atom grid checked at construction");
            acc += a.weight * Complex64::cis(theta);
        }
        Ok(acc)
    }

    /// `F(-.)`: atoms negated, weights unchanged. An involution.
    pub fn reflected(&self) -> CylinderFunctional {
        let atoms = self
            .measure
            .atoms()
            .iter()
            .map(|a| WeightedAtom { weight: a.weight, atom: a.atom.scaled(-1.0) })
            .collect();
        CylinderFunctional { measure: DiscreteMeasure { grid: self.measure.grid, atoms } }
    }

    /// `F + G` as functionals: merged atom lists.
    pub fn merged(&self, other: &CylinderFunctional) -> Result<CylinderFunctional> {
        Ok(CylinderFunctional { measure: self.measure.merged(&other.measure)? })
    }
}

/// Variance parameter of the functional integrals: either a genuine Gaussian
/// parameter `lambda > 0` or the Feynman limit point `lambda -> -iq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeynmanParameter {
    RealLambda(f64),
    FeynmanQ(f64),
}

impl FeynmanParameter {
    pub fn real_lambda(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self::RealLambda(lambda))
    }

    pub fn feynman_q(q: f64) -> Result<Self> {
        if !(q.is_finite() && q != 0.0) {
            return Err(Error::InvalidArgument(format!("q must be nonzero and finite, got {q}")));
        }
        Ok(Self::FeynmanQ(q))
    }

    /// The weight an atom with `||u h||^2 = norm_sq` picks up:
    /// `exp{-norm_sq/(2 lambda)}` at real lambda, `exp{-i norm_sq/(2q)}` in
    /// the Feynman limit.
    pub fn phase_factor(&self, norm_sq: f64) -> Complex64 {
        match self {
            Self::RealLambda(lambda) => Complex64::new((-norm_sq / (2.0 * lambda)).exp(), 0.0),
            Self::FeynmanQ(q) => Complex64::cis(-norm_sq / (2.0 * q)),
        }
    }
}

/// Generalized Fourier-Yeh-Feynman transform `T_{q,h}(F)` at the measure
/// level: same atoms, weight `c_j` multiplied by `exp{-i ||u_j h||^2 / (2q)}`.
///
/// The phases have unit modulus, so the total variation is preserved, and
/// `T_{-q,h}` inverts `T_{q,h}` exactly. The transform depends on `h` only
/// through `h^2`, so `T_{q,h} = T_{q,-h}`.
pub fn gfyft(f: &CylinderFunctional, h: &GridFunction, q: f64) -> Result<CylinderFunctional> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be nonzero and finite, got {q}")));
    }
    f.grid().check_same(h.grid(), "gfyft")?;
    let atoms = f
        .measure()
        .atoms()
        .iter()
        .map(|a| {
            let norm_sq = a.atom.pointwise_mul(h).expect("same grid").l2_norm_sq();
            WeightedAtom {
                weight: a.weight * Complex64::cis(-norm_sq / (2.0 * q)),
                atom: a.atom.clone(),
            }
        })
        .collect();
    Ok(CylinderFunctional { measure: DiscreteMeasure { grid: *f.grid(), atoms } })
}

/// Iterated transform `T_{q,h_n}( ... T_{q,h_1}(F) ... )` over a kernel list.
pub fn gfyft_composed(
    f: &CylinderFunctional,
    kernels: &[GridFunction],
    q: f64,
) -> Result<CylinderFunctional> {
    let mut acc = f.clone();
    for h in kernels {
        acc = gfyft(&acc, h, q)?;
    }
    Ok(acc)
}

/// Generalized convolution product `(F * G)_q^{(k1,k2)}` at the measure
/// level: atoms `(u_j + v_k)/sqrt(2)` over all pairs, weights
/// `c_j d_k exp{-i ||u_j k1 - v_k k2||^2 / (4q)}`.
pub fn gcp(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    k1: &GridFunction,
    k2: &GridFunction,
    q: f64,
) -> Result<CylinderFunctional> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be nonzero and finite, got {q}")));
    }
    f.grid().check_same(g.grid(), "gcp")?;
    f.grid().check_same(k1.grid(), "gcp k1")?;
    f.grid().check_same(k2.grid(), "gcp k2")?;
    let mut atoms = Vec::with_capacity(f.measure().atoms().len() * g.measure().atoms().len());
    for fa in f.measure().atoms() {
        let u_k1 = fa.atom.pointwise_mul(k1).expect("same grid");
        for ga in g.measure().atoms() {
            let v_k2 = ga.atom.pointwise_mul(k2).expect("same grid");
            let cross_sq = u_k1.sub(&v_k2).expect("same grid").l2_norm_sq();
            let weight = fa.weight * ga.weight * Complex64::cis(-cross_sq / (4.0 * q));
            let atom = fa.atom.add(&ga.atom).expect("same grid").scaled(SQRT_2_INV);
            atoms.push(WeightedAtom { weight, atom });
        }
    }
    Ok(CylinderFunctional { measure: DiscreteMeasure { grid: *f.grid(), atoms } })
}

/// The product functional `y -> F(y/sqrt(2)) G(y/sqrt(2))`: atoms
/// `(u_j + v_k)/sqrt(2)` with plain weight products, no phase factor.
pub fn scaled_product(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
) -> Result<CylinderFunctional> {
    f.grid().check_same(g.grid(), "scaled_product")?;
    let mut atoms = Vec::with_capacity(f.measure().atoms().len() * g.measure().atoms().len());
    for fa in f.measure().atoms() {
        for ga in g.measure().atoms() {
            atoms.push(WeightedAtom {
                weight: fa.weight * ga.weight,
                atom: fa.atom.add(&ga.atom).expect("same grid").scaled(SQRT_2_INV),
            });
        }
    }
    Ok(CylinderFunctional { measure: DiscreteMeasure { grid: *f.grid(), atoms } })
}
