//! Exact and fast approximate forms of the three scalar kernels the vector
//! filters spend their time in: inverse cosine, negative exponential, and
//! the entropy term `z·ln z`.
//!
//! The approximate forms evaluate small minimax polynomial/rational fits by
//! nested multiplication, so a filter running on them performs no
//! transcendental library calls in its inner loop (one hardware square root
//! remains in the inverse-cosine composite). Every fit carries a certified
//! worst-case error and can be re-verified or swapped out via the
//! coefficient table format in [`crate::minimax`].

use std::sync::OnceLock;

use thiserror::Error;

use crate::minimax::{
    certify_error, eval_poly, Approx, MinimaxError, PolyApprox, RationalApprox, TableEntry,
    TableRecord,
};

/// Degree-4 fit of `arccos(z)` on `[0, 0.5]`.
const ARCCOS_COEFFS: [f64; 5] = [
    1.570786,
    -9.990285e-01,
    -1.429899e-02,
    -9.481335e-02,
    -1.381942e-01,
];
const ARCCOS_EPS: f64 = 1.048949e-05;

/// Degree-4 fit of `g(t) = 2·arcsin(t/√2)` on `[0, 1/√2]`; together with
/// `t = sqrt(1 - z)` this continues `arccos(z)` past `z = 0.5`, where a
/// direct polynomial in `z` would need a much higher degree.
const ARCSIN2_COEFFS: [f64; 5] = [
    2.097797e-05,
    1.412840,
    1.429881e-02,
    6.704361e-02,
    6.909677e-02,
];
const ARCSIN2_EPS: f64 = 2.097814e-05;

/// Degree-2..4 fits of `exp(-u)` on `[0, 10]`, selectable for speed
/// experiments where the rational fit's accuracy is not needed.
const EXP_POLY2_COEFFS: [f64; 3] = [8.214528e-01, -3.186948e-01, 2.544088e-02];
const EXP_POLY2_EPS: f64 = 1.785517e-01;
const EXP_POLY3_COEFFS: [f64; 4] = [
    9.174126e-01,
    -5.631179e-01,
    1.015041e-01,
    -5.519183e-03,
];
const EXP_POLY3_EPS: f64 = 8.259345e-02;
const EXP_POLY4_COEFFS: [f64; 5] = [
    9.666313e-01,
    -7.620584e-01,
    2.145386e-01,
    -2.509526e-02,
    1.032877e-03,
];
const EXP_POLY4_EPS: f64 = 3.337085e-02;

/// Degree-4/4 rational fit of `exp(-u)` on `[0, 10]` — the default
/// approximate exponential.
const EXP_RAT_NUM: [f64; 5] = [
    3.206619e-02,
    -1.195191e-02,
    1.756974e-03,
    -1.199261e-04,
    3.182685e-06,
];
const EXP_RAT_DEN: [f64; 5] = [
    3.206627e-02,
    2.011147e-02,
    5.853684e-03,
    9.780143e-04,
    1.251598e-04,
];
const EXP_RAT_EPS: f64 = 2.227050e-06;

/// Degree-4/4 rational fit of `z·ln z` on `[0.05, 1]`.
const ENT_RAT_NUM: [f64; 5] = [
    -1.519742e-04,
    -6.835769e-02,
    -8.856923e-01,
    -5.369609e-01,
    1.491165,
];
const ENT_RAT_DEN: [f64; 5] = [
    1.532270e-02,
    3.987796e-01,
    1.461793,
    6.827004e-01,
    -4.469776e-02,
];
const ENT_RAT_EPS: f64 = 7.342477e-07;

/// Arguments beyond this evaluate the approximate exponential to 0
/// (`exp(-10) ≈ 4.54e-05` is already below the fit's resolution).
pub const EXP_CUTOFF: f64 = 10.0;

/// Arguments below this evaluate the approximate entropy term to 0; the
/// rational fit is certified on `[0.05, 1]` only.
pub const ENT_CUTOFF: f64 = 0.05;

/// A verified approximant's measured error may exceed its stored certificate
/// by at most this factor (grid sampling and rounding slack).
pub const KERNEL_EPS_SLACK: f64 = 1.2;

#[derive(Debug, Error)]
pub enum KernelTableError {
    #[error(transparent)]
    Minimax(#[from] MinimaxError),
    #[error("coefficient table is missing record {0:?}")]
    MissingRecord(&'static str),
    #[error("record {name:?} must be kind={expected}")]
    WrongKind {
        name: &'static str,
        expected: &'static str,
    },
    #[error("record {name:?} is unusable: {why}")]
    Invalid { name: &'static str, why: String },
}

/// Outcome of re-certifying one stored approximant against its exact
/// counterpart: the freshly measured max error next to the stored one.
#[derive(Debug, Clone)]
pub struct KernelCheck {
    pub name: String,
    pub measured: f64,
    pub stored: f64,
}

impl KernelCheck {
    /// A check passes when the measurement confirms the stored certificate
    /// within [`KERNEL_EPS_SLACK`].
    pub fn passed(&self) -> bool {
        self.measured <= KERNEL_EPS_SLACK * self.stored
    }
}

/// The full set of kernel approximants used by the approximate filter paths,
/// immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    arccos_poly: PolyApprox,
    arcsin_poly: PolyApprox,
    exp_polys: [PolyApprox; 3],
    exp_rational: RationalApprox,
    ent_rational: RationalApprox,
    exp_cutoff: f64,
    ent_cutoff: f64,
}

fn builtin_table() -> KernelTable {
    let iv = |a, b| (a, b);
    KernelTable {
        arccos_poly: PolyApprox::new(ARCCOS_COEFFS.to_vec(), iv(0.0, 0.5), ARCCOS_EPS)
            .expect("static interval"),
        arcsin_poly: PolyApprox::new(
            ARCSIN2_COEFFS.to_vec(),
            iv(0.0, std::f64::consts::FRAC_1_SQRT_2),
            ARCSIN2_EPS,
        )
        .expect("static interval"),
        exp_polys: [
            PolyApprox::new(EXP_POLY2_COEFFS.to_vec(), iv(0.0, 10.0), EXP_POLY2_EPS)
                .expect("static interval"),
            PolyApprox::new(EXP_POLY3_COEFFS.to_vec(), iv(0.0, 10.0), EXP_POLY3_EPS)
                .expect("static interval"),
            PolyApprox::new(EXP_POLY4_COEFFS.to_vec(), iv(0.0, 10.0), EXP_POLY4_EPS)
                .expect("static interval"),
        ],
        exp_rational: RationalApprox::new(
            EXP_RAT_NUM.to_vec(),
            EXP_RAT_DEN.to_vec(),
            iv(0.0, 10.0),
            EXP_RAT_EPS,
        )
        .expect("static interval"),
        ent_rational: RationalApprox::new(
            ENT_RAT_NUM.to_vec(),
            ENT_RAT_DEN.to_vec(),
            iv(ENT_CUTOFF, 1.0),
            ENT_RAT_EPS,
        )
        .expect("static interval"),
        exp_cutoff: EXP_CUTOFF,
        ent_cutoff: ENT_CUTOFF,
    }
}

impl KernelTable {
    /// The compiled-in table.
    pub fn builtin() -> &'static KernelTable {
        static TABLE: OnceLock<KernelTable> = OnceLock::new();
        TABLE.get_or_init(builtin_table)
    }

    /// Assembles a table from named coefficient records (see
    /// [`KernelTable::to_records`] for the expected names). Unknown record
    /// names are ignored; cutoffs derive from the record intervals.
    pub fn from_records(records: &[TableRecord]) -> Result<Self, KernelTableError> {
        fn find_poly(
            records: &[TableRecord],
            name: &'static str,
        ) -> Result<PolyApprox, KernelTableError> {
            match records.iter().find(|r| r.name == name) {
                Some(TableRecord {
                    entry: TableEntry::Poly(p),
                    ..
                }) => Ok(p.clone()),
                Some(_) => Err(KernelTableError::WrongKind {
                    name,
                    expected: "poly",
                }),
                None => Err(KernelTableError::MissingRecord(name)),
            }
        }
        fn find_rational(
            records: &[TableRecord],
            name: &'static str,
        ) -> Result<RationalApprox, KernelTableError> {
            match records.iter().find(|r| r.name == name) {
                Some(TableRecord {
                    entry: TableEntry::Rational(r),
                    ..
                }) => Ok(r.clone()),
                Some(_) => Err(KernelTableError::WrongKind {
                    name,
                    expected: "rational",
                }),
                None => Err(KernelTableError::MissingRecord(name)),
            }
        }
        fn require(
            cond: bool,
            name: &'static str,
            why: &str,
        ) -> Result<(), KernelTableError> {
            if cond {
                Ok(())
            } else {
                Err(KernelTableError::Invalid {
                    name,
                    why: why.to_string(),
                })
            }
        }

        let arccos_poly = find_poly(records, "ARCCOS")?;
        let arcsin_poly = find_poly(records, "ARCSIN2")?;
        let exp_polys = [
            find_poly(records, "EXPNEG_POLY2")?,
            find_poly(records, "EXPNEG_POLY3")?,
            find_poly(records, "EXPNEG_POLY4")?,
        ];
        let exp_rational = find_rational(records, "EXPNEG_RAT")?;
        let ent_rational = find_rational(records, "ENT_RAT")?;

        let branch = arccos_poly.interval().1;
        require(
            arccos_poly.interval().0 == 0.0 && branch > 0.0 && branch < 1.0,
            "ARCCOS",
            "interval must be [0, b] with 0 < b < 1",
        )?;
        require(
            arcsin_poly.interval().0 == 0.0
                && arcsin_poly.interval().1 + 1e-12 >= (1.0 - branch).sqrt(),
            "ARCSIN2",
            "interval must cover [0, sqrt(1 - b)] for the ARCCOS branch point b",
        )?;
        for (i, p) in exp_polys.iter().enumerate() {
            require(
                p.degree() == i + 2,
                ["EXPNEG_POLY2", "EXPNEG_POLY3", "EXPNEG_POLY4"][i],
                "degree must match the record name",
            )?;
        }
        require(
            exp_rational.interval().0 == 0.0,
            "EXPNEG_RAT",
            "interval must start at 0",
        )?;
        require(
            ent_rational.interval().1 >= 1.0 - 1e-9,
            "ENT_RAT",
            "interval must reach 1",
        )?;

        Ok(Self {
            exp_cutoff: exp_rational.interval().1,
            ent_cutoff: ent_rational.interval().0,
            arccos_poly,
            arcsin_poly,
            exp_polys,
            exp_rational,
            ent_rational,
        })
    }

    /// Loads a table from a coefficient table file.
    pub fn load(path: &std::path::Path) -> Result<Self, KernelTableError> {
        Ok(Self::from_records(&crate::minimax::read_table(path)?)?)
    }

    /// The table as named records, suitable for [`crate::minimax::write_table`].
    pub fn to_records(&self) -> Vec<TableRecord> {
        vec![
            TableRecord::poly("ARCCOS", self.arccos_poly.clone()),
            TableRecord::poly("ARCSIN2", self.arcsin_poly.clone()),
            TableRecord::poly("EXPNEG_POLY2", self.exp_polys[0].clone()),
            TableRecord::poly("EXPNEG_POLY3", self.exp_polys[1].clone()),
            TableRecord::poly("EXPNEG_POLY4", self.exp_polys[2].clone()),
            TableRecord::rational("EXPNEG_RAT", self.exp_rational.clone()),
            TableRecord::rational("ENT_RAT", self.ent_rational.clone()),
        ]
    }

    /// Re-certifies every record against its exact counterpart on a fresh
    /// uniform grid and reports measured vs stored error. Stored
    /// certificates are left untouched.
    pub fn verify(&self, grid_points: usize) -> Result<Vec<KernelCheck>, MinimaxError> {
        fn check<A, F>(
            name: &str,
            approx: &A,
            f: F,
            grid_points: usize,
            out: &mut Vec<KernelCheck>,
        ) -> Result<(), MinimaxError>
        where
            A: Approx + Clone,
            F: Fn(f64) -> f64 + Sync,
        {
            let mut fresh = approx.clone();
            let measured = certify_error(&mut fresh, f, grid_points)?;
            out.push(KernelCheck {
                name: name.to_string(),
                measured,
                stored: approx.eps(),
            });
            Ok(())
        }

        let mut checks = Vec::new();
        check("ARCCOS", &self.arccos_poly, arccos_exact, grid_points, &mut checks)?;
        check(
            "ARCSIN2",
            &self.arcsin_poly,
            |t| 2.0 * (t * std::f64::consts::FRAC_1_SQRT_2).asin(),
            grid_points,
            &mut checks,
        )?;
        for (i, p) in self.exp_polys.iter().enumerate() {
            check(
                &format!("EXPNEG_POLY{}", i + 2),
                p,
                exp_neg_exact,
                grid_points,
                &mut checks,
            )?;
        }
        check("EXPNEG_RAT", &self.exp_rational, exp_neg_exact, grid_points, &mut checks)?;
        check("ENT_RAT", &self.ent_rational, ent_exact, grid_points, &mut checks)?;
        Ok(checks)
    }

    /// Approximate `arccos(z)` for `z` in `[0, 1]` (inputs are clamped).
    ///
    /// Composite scheme: the direct fit below the branch point, and the
    /// arcsine identity `arccos(z) = 2·arcsin(sqrt((1-z)/2))` above it,
    /// which stays well conditioned as z approaches 1. Worst-case absolute
    /// error 2.2e-05 over [0, 1].
    #[inline]
    pub fn arccos_approx(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        if z <= self.arccos_poly.interval().1 {
            eval_poly(self.arccos_poly.coeffs(), z)
        } else {
            let t = (1.0 - z).sqrt();
            eval_poly(self.arcsin_poly.coeffs(), t)
        }
    }

    /// Approximate `exp(-u)` for `u >= 0`: 0 beyond the cutoff, the rational
    /// fit otherwise.
    #[inline]
    pub fn exp_neg_approx(&self, u: f64) -> f64 {
        if u > self.exp_cutoff {
            0.0
        } else {
            self.exp_rational.eval(u)
        }
    }

    /// Approximate `exp(-u)` through the polynomial fit of the given degree
    /// (2, 3, or 4) — cheaper and correspondingly less accurate than
    /// [`KernelTable::exp_neg_approx`].
    ///
    /// # Panics
    /// If `degree` is not 2, 3, or 4.
    #[inline]
    pub fn exp_neg_approx_poly(&self, u: f64, degree: usize) -> f64 {
        assert!(
            (2..=4).contains(&degree),
            "polynomial exponential fits exist for degrees 2-4, got {degree}"
        );
        if u > self.exp_cutoff {
            0.0
        } else {
            eval_poly(self.exp_polys[degree - 2].coeffs(), u)
        }
    }

    /// Approximate `z·ln z` for `z` in `[0, 1]`: 0 below the cutoff, the
    /// rational fit otherwise.
    #[inline]
    pub fn ent_approx(&self, z: f64) -> f64 {
        if z < self.ent_cutoff {
            0.0
        } else {
            self.ent_rational.eval(z)
        }
    }

    pub fn arccos_poly(&self) -> &PolyApprox {
        &self.arccos_poly
    }

    pub fn arcsin_poly(&self) -> &PolyApprox {
        &self.arcsin_poly
    }

    /// Polynomial exponential fit of the given degree (2, 3, or 4).
    pub fn exp_poly(&self, degree: usize) -> &PolyApprox {
        assert!((2..=4).contains(&degree));
        &self.exp_polys[degree - 2]
    }

    pub fn exp_rational(&self) -> &RationalApprox {
        &self.exp_rational
    }

    pub fn ent_rational(&self) -> &RationalApprox {
        &self.ent_rational
    }

    pub fn exp_cutoff(&self) -> f64 {
        self.exp_cutoff
    }

    pub fn ent_cutoff(&self) -> f64 {
        self.ent_cutoff
    }
}

/// `arccos(z)` with the argument clamped to `[-1, 1]`, absorbing cosine
/// values that land a rounding error outside the domain.
#[inline]
pub fn arccos_exact(z: f64) -> f64 {
    z.clamp(-1.0, 1.0).acos()
}

/// `exp(-u)`.
#[inline]
pub fn exp_neg_exact(u: f64) -> f64 {
    (-u).exp()
}

/// `z·ln z` with the `0·ln 0 = 0` limit convention.
#[inline]
pub fn ent_exact(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z * z.ln()
    }
}

/// [`KernelTable::arccos_approx`] on the built-in table.
#[inline]
pub fn arccos_approx(z: f64) -> f64 {
    KernelTable::builtin().arccos_approx(z)
}

/// [`KernelTable::exp_neg_approx`] on the built-in table.
#[inline]
pub fn exp_neg_approx(u: f64) -> f64 {
    KernelTable::builtin().exp_neg_approx(u)
}

/// [`KernelTable::ent_approx`] on the built-in table.
#[inline]
pub fn ent_approx(z: f64) -> f64 {
    KernelTable::builtin().ent_approx(z)
}
