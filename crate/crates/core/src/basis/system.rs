use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Affine2;
use crate::special::{KernelSpec, UnitComplex};

/// The Haar families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum HaarSystem {
    /// Dyadic intervals of the line.
    Dyadic1D,
    /// Tensor-product Haar functions of dyadic squares.
    Orig,
    /// Squares with one halving function and two quarter-pair functions.
    New,
    /// `New` transported to the lattice spanned by `(1,0)` and `b(cos φ, sin φ)`.
    Parallelogram { b: f64, phi: f64 },
    /// Squares with the checkerboard function and the two diagonal pairs,
    /// transported like `Parallelogram`.
    Diagonal { b: f64, phi: f64 },
    /// Triangle lattice transported by `(x, y) ↦ (x + a y, b y)`.
    Triangle { a: f64, b: f64 },
    /// Dyadic cubes with seven functions per cube.
    Cube,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellShape {
    Interval,
    Square,
    Triangle,
    Cube,
}

/// Index of a function type within its system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Kind(pub u8);

pub(crate) struct KindDef {
    pub label: &'static str,
    /// Value on each child for a cell of unit measure.
    pub values: &'static [f64],
}

const R2: f64 = SQRT_2;

static KINDS_1D: [KindDef; 1] = [KindDef {
    label: "h",
    values: &[-1.0, 1.0],
}];

static KINDS_ORIG: [KindDef; 3] = [
    KindDef {
        label: "1",
        values: &[-1.0, -1.0, 1.0, 1.0],
    },
    KindDef {
        label: "2",
        values: &[-1.0, 1.0, -1.0, 1.0],
    },
    KindDef {
        label: "3",
        values: &[1.0, -1.0, -1.0, 1.0],
    },
];

static KINDS_NEW: [KindDef; 3] = [
    KindDef {
        label: "0",
        values: &[-1.0, -1.0, 1.0, 1.0],
    },
    KindDef {
        label: "+",
        values: &[0.0, 0.0, -R2, R2],
    },
    KindDef {
        label: "-",
        values: &[-R2, R2, 0.0, 0.0],
    },
];

static KINDS_DIAGONAL: [KindDef; 3] = [
    KindDef {
        label: "0",
        values: &[1.0, -1.0, -1.0, 1.0],
    },
    KindDef {
        label: "+",
        values: &[-R2, 0.0, 0.0, R2],
    },
    KindDef {
        label: "-",
        values: &[0.0, -R2, R2, 0.0],
    },
];

// Children: 0 at the right-angle corner, 1 and 2 at the other corners along
// the first and second axis, 3 the inverted middle triangle.
static KINDS_TRIANGLE: [KindDef; 3] = [
    KindDef {
        label: "0",
        values: &[1.0, -1.0, -1.0, 1.0],
    },
    KindDef {
        label: "+",
        values: &[0.0, -R2, R2, 0.0],
    },
    KindDef {
        label: "-",
        values: &[R2, 0.0, 0.0, -R2],
    },
];

static KINDS_CUBE: [KindDef; 7] = [
    KindDef {
        label: "1",
        values: &[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0],
    },
    KindDef {
        label: "2",
        values: &[R2, R2, -R2, -R2, 0.0, 0.0, 0.0, 0.0],
    },
    KindDef {
        label: "3",
        values: &[0.0, 0.0, 0.0, 0.0, R2, R2, -R2, -R2],
    },
    KindDef {
        label: "4",
        values: &[2.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    },
    KindDef {
        label: "5",
        values: &[0.0, 0.0, 2.0, -2.0, 0.0, 0.0, 0.0, 0.0],
    },
    KindDef {
        label: "6",
        values: &[0.0, 0.0, 0.0, 0.0, 2.0, -2.0, 0.0, 0.0],
    },
    KindDef {
        label: "7",
        values: &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, -2.0],
    },
];

static GROUPS_ONE: [&[u8]; 1] = [&[0]];
static GROUPS_ORIG: [&[u8]; 1] = [&[0, 1, 2]];
static GROUPS_SPLIT: [&[u8]; 2] = [&[0], &[1, 2]];
static GROUPS_CUBE: [&[u8]; 3] = [&[0], &[1, 2], &[3, 4, 5, 6]];

impl HaarSystem {
    pub fn dim(&self) -> usize {
        match self {
            HaarSystem::Dyadic1D => 1,
            HaarSystem::Cube => 3,
            _ => 2,
        }
    }

    pub fn shape(&self) -> CellShape {
        match self {
            HaarSystem::Dyadic1D => CellShape::Interval,
            HaarSystem::Cube => CellShape::Cube,
            HaarSystem::Triangle { .. } => CellShape::Triangle,
            _ => CellShape::Square,
        }
    }

    /// Children per cell.
    pub fn branching(&self) -> usize {
        1 << self.dim()
    }

    pub(crate) fn kind_defs(&self) -> &'static [KindDef] {
        match self {
            HaarSystem::Dyadic1D => &KINDS_1D,
            HaarSystem::Orig => &KINDS_ORIG,
            HaarSystem::New | HaarSystem::Parallelogram { .. } => &KINDS_NEW,
            HaarSystem::Diagonal { .. } => &KINDS_DIAGONAL,
            HaarSystem::Triangle { .. } => &KINDS_TRIANGLE,
            HaarSystem::Cube => &KINDS_CUBE,
        }
    }

    pub fn kinds(&self) -> Vec<Kind> {
        (0..self.kind_defs().len() as u8).map(Kind).collect()
    }

    pub fn kind_count(&self) -> usize {
        self.kind_defs().len()
    }

    pub fn kind_label(&self, k: Kind) -> &'static str {
        self.kind_defs()[k.0 as usize].label
    }

    pub fn kind_from_label(&self, label: &str) -> Option<Kind> {
        self.kind_defs()
            .iter()
            .position(|d| d.label == label)
            .map(|i| Kind(i as u8))
    }

    /// Values of kind `k` on the children of a unit-measure cell.
    pub fn child_values(&self, k: Kind) -> &'static [f64] {
        self.kind_defs()[k.0 as usize].values
    }

    /// Kinds added together at each step of one generation of the
    /// filtration that makes transforms differentially subordinate. For
    /// `Orig` this is the single three-kind step, which is not.
    pub fn filtration_groups(&self) -> Vec<Vec<Kind>> {
        let g: &[&[u8]] = match self {
            HaarSystem::Dyadic1D => &GROUPS_ONE,
            HaarSystem::Orig => &GROUPS_ORIG,
            HaarSystem::Cube => &GROUPS_CUBE,
            _ => &GROUPS_SPLIT,
        };
        g.iter().map(|s| s.iter().map(|&k| Kind(k)).collect()).collect()
    }

    /// Reference-to-physical map of a planar system.
    pub fn reference_map(&self) -> Affine2 {
        match *self {
            HaarSystem::Parallelogram { b, phi } | HaarSystem::Diagonal { b, phi } => {
                Affine2::linear([[1.0, b * phi.cos()], [0.0, b * phi.sin()]])
            }
            HaarSystem::Triangle { a, b } => Affine2::linear([[1.0, a], [0.0, b]]),
            _ => Affine2::IDENTITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            HaarSystem::Parallelogram { b, phi } | HaarSystem::Diagonal { b, phi } => {
                if !(b.is_finite() && b > 0.0) {
                    return Err(Error::UnsupportedParams(format!("b must be positive, got {b}")));
                }
                if !(phi > 0.0 && phi < std::f64::consts::PI) {
                    return Err(Error::UnsupportedParams(format!(
                        "phi must lie in (0, π), got {phi}"
                    )));
                }
            }
            HaarSystem::Triangle { a, b } => {
                if !(b.is_finite() && b > 0.0) || !a.is_finite() {
                    return Err(Error::UnsupportedParams(format!(
                        "triangle needs finite a and b > 0, got a={a}, b={b}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Averaged kernel of the system for the sign pattern `(σ₀, σ₊, σ₋)`,
    /// where one exists in closed form.
    pub fn kernel_spec(&self, sigma: [UnitComplex; 3]) -> Option<KernelSpec> {
        match *self {
            HaarSystem::New => Some(KernelSpec::new_family(1.0, FRAC_PI_2, sigma)),
            HaarSystem::Parallelogram { b, phi } => Some(KernelSpec::new_family(b, phi, sigma)),
            HaarSystem::Diagonal { b, phi } if phi == FRAC_PI_2 => Some(KernelSpec::Diagonal {
                b,
                sigma0: sigma[0],
                sigma_plus: sigma[1],
                sigma_minus: sigma[2],
            }),
            HaarSystem::Triangle { a, b } => Some(KernelSpec::Triangle {
                a,
                b,
                sigma0: sigma[0],
                sigma_plus: sigma[1],
                sigma_minus: sigma[2],
            }),
            _ => None,
        }
    }

    /// One representative of every family, for test sweeps.
    pub fn catalogue() -> Vec<HaarSystem> {
        vec![
            HaarSystem::Dyadic1D,
            HaarSystem::Orig,
            HaarSystem::New,
            HaarSystem::Parallelogram { b: 1.3, phi: 1.1 },
            HaarSystem::Diagonal { b: 0.8, phi: 1.3 },
            HaarSystem::Triangle { a: 0.3, b: 0.9 },
            HaarSystem::Cube,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            HaarSystem::Dyadic1D => "dyadic1d",
            HaarSystem::Orig => "orig",
            HaarSystem::New => "new",
            HaarSystem::Parallelogram { .. } => "parallelogram",
            HaarSystem::Diagonal { .. } => "diagonal",
            HaarSystem::Triangle { .. } => "triangle",
            HaarSystem::Cube => "cube",
        }
    }
}

impl fmt::Display for HaarSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HaarSystem::Parallelogram { b, phi } | HaarSystem::Diagonal { b, phi } => {
                write!(f, "{}(b={b}, phi={phi})", self.name())
            }
            HaarSystem::Triangle { a, b } => write!(f, "triangle(a={a}, b={b})"),
            _ => f.write_str(self.name()),
        }
    }
}
