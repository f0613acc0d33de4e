//! Least-squares fitting of measured hyperfine spectra.
//!
//! The model is the physical one: component positions are not free — they
//! are tied to the four hyperfine constants through the level-shift formula,
//! so a fit with dozens of partially resolved components still has only a
//! handful of structural degrees of freedom. Relative intensities float
//! (saturation and optical pumping bend them away from the angular-momentum
//! prediction) but stay normalized to unit sum, with the overall scale in a
//! single amplitude.
//!
//! The parameter vector layout is fixed:
//!
//! ```text
//! [a_lower, b_lower, a_upper, b_upper, cog, gaussian_fwhm,
//!  lorentzian_fwhm, amplitude, intensity_0 .. intensity_{n-1},
//!  baseline_offset, baseline_slope]
//! ```
//!
//! Minimization is Levenberg–Marquardt with multiplicative damping on the
//! normal-equation diagonal. Widths are optimized in log coordinates (they
//! stay positive by construction and their uncertainty transforms by the
//! delta method). The Jacobian is forward-difference; every accepted step
//! re-normalizes the intensities, folding the scale into the amplitude when
//! that is free, so the unit-sum constraint holds exactly throughout.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::hfs::{casimir_shift, component_pairs, relative_intensity, HfsComponent,
                 HfsConstants, Transition};
use crate::lineshape::{SpectrumModel, VoigtProfile};
use crate::trace::Trace;

const IDX_A_LOWER: usize = 0;
const IDX_B_LOWER: usize = 1;
const IDX_A_UPPER: usize = 2;
const IDX_B_UPPER: usize = 3;
const IDX_COG: usize = 4;
const IDX_GAUSSIAN: usize = 5;
const IDX_LORENTZIAN: usize = 6;
const IDX_AMPLITUDE: usize = 7;
/// Number of parameters before the per-component intensity block.
const N_SHAPE_PARAMS: usize = 8;

/// Initial damping factor of the normal equations.
const INITIAL_LAMBDA: f64 = 1e-3;
/// Damping growth/shrink ratio per rejected/accepted step.
const LAMBDA_RATIO: f64 = 3.0;
/// Damping beyond this means no downhill direction exists.
const LAMBDA_MAX: f64 = 1e14;
/// A proposed step shorter than this (internal coordinates) is convergence.
const STEP_NORM_TOL: f64 = 1e-8;
/// Relative chi-square improvement below this counts as "small".
const REL_CHI2_TOL: f64 = 1e-8;
/// Number of consecutive small improvements that ends the fit.
const SMALL_STEPS_TO_CONVERGE: usize = 3;
/// Outer-iteration cap (each outer iteration evaluates one Jacobian).
const MAX_ITERATIONS: usize = 500;
/// Forward-difference step: `max(FD_REL * |u|, FD_ABS)` per coordinate.
const FD_REL_STEP: f64 = 1e-6;
const FD_ABS_STEP: f64 = 1e-3;
/// Eigenvalues below this fraction of the largest are treated as exact
/// degeneracies when inverting the normal matrix for uncertainties.
const RANK_TOL: f64 = 1e-12;
/// Hard feasibility ceiling on the component widths, in MHz.
///
/// A fit that lets a width grow without bound can lower chi-square by
/// smearing every component into one broad pedestal; once the internal
/// log-width coordinate gets large enough, `exp` overflows inside the
/// finite-difference Jacobian and the whole fit aborts.  No physical
/// spectrum handled here is wider than a few GHz, so anything beyond this
/// ceiling is rejected as an infeasible trial step instead.
const WIDTH_RUNAWAY_MHZ: f64 = 1e9;
/// Hard feasibility floor on a free component width, in MHz (1 Hz).
///
/// The mirror image of the runaway: a fit whose components sit in the
/// wrong place can lower chi-square by collapsing a width until the
/// multiplet drops between the sample points and only the baseline is
/// left. Let it run and the width underflows to zero, its log coordinate
/// to -inf, and the next finite-difference step is NaN. Nothing measured
/// here is remotely this narrow, so such trials are rejected instead.
const WIDTH_COLLAPSE_MHZ: f64 = 1e-6;

/// Starting point for a fit, in physical units.
///
/// `intensities` may be `None`, in which case the angular-momentum
/// prediction for the transition is used — the standard starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub a_lower_mhz: f64,
    pub b_lower_mhz: f64,
    pub a_upper_mhz: f64,
    pub b_upper_mhz: f64,
    /// Centre of gravity on the trace's frequency axis, MHz.
    pub cog_mhz: f64,
    pub gaussian_fwhm_mhz: f64,
    pub lorentzian_fwhm_mhz: f64,
    /// Peak height of a relative-intensity-1 component, detector units.
    pub amplitude: f64,
    /// One weight per component in `(F, F')` ascending order; normalized on
    /// ingestion. `None` selects the theoretical relative intensities.
    pub intensities: Option<Vec<f64>>,
    pub baseline_offset: f64,
    pub baseline_slope: f64,
}

/// One entry of the fitted parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParameter {
    pub name: String,
    pub value: f64,
    /// One-standard-deviation uncertainty. `None` for fixed parameters, for
    /// unconverged fits, and when the normal matrix could not be inverted.
    pub sigma: Option<f64>,
    pub fixed: bool,
}

/// Outcome of a fit. `converged == false` (iteration cap) is a valid
/// outcome, reported rather than raised: the parameters are the best found.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub parameters: Vec<FittedParameter>,
    /// Sum of squared residuals at the solution.
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Outer iterations used (one Jacobian evaluation each).
    pub iterations: usize,
    pub converged: bool,
    /// Residual trace (data minus model, same abscissa as the input).
    #[serde(skip)]
    pub deviation: Trace,
    /// Chi-square after the initial evaluation and each accepted step.
    #[serde(skip)]
    pub chi_square_history: Vec<f64>,
}

impl FitResult {
    pub fn parameter(&self, name: &str) -> Option<&FittedParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of a parameter by name; panics are deliberately avoided, so
    /// a missing name yields `None`.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameter(name).map(|p| p.value)
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.parameter(name).and_then(|p| p.sigma)
    }
}

/// A spectrum-fitting problem: one scan, one transition, one parameter
/// vector.
#[derive(Debug, Clone)]
pub struct FitProblem {
    nuclear_spin: HalfInt,
    j_lower: HalfInt,
    j_upper: HalfInt,
    /// Component (F, F') pairs in ascending order; fixes the meaning of the
    /// intensity block.
    pairs: Vec<(HalfInt, HalfInt)>,
    names: Vec<String>,
    freq: Vec<f64>,
    data: Vec<f64>,
    trace: Trace,
    initial: Vec<f64>,
    fixed: Vec<bool>,
}

impl FitProblem {
    /// Sets up a fit of `trace` to the hyperfine model of `transition`.
    ///
    /// The trace must carry a real frequency axis; fitting against raw
    /// sample indices silently produces nonsense, so it is refused.
    ///
    /// Parameters that provably cannot affect the model start fixed: the
    /// quadrupole constants when I <= 1/2 or the respective J <= 1/2 (their
    /// angular factor is identically zero), both dipole constants when
    /// I = 0, and a width that starts at exactly zero (it parameterizes a
    /// vanished profile component). They may be un-fixed explicitly, at the
    /// cost of a singular-equations error.
    pub fn new(transition: &Transition, trace: Trace, guess: &InitialGuess) -> Result<Self> {
        if !trace.frequency_axis_valid {
            return Err(Error::MissingFrequencyAxis);
        }
        let i = transition.nuclear_spin();
        let (jl, ju) = (transition.lower().j, transition.upper().j);
        let pairs = component_pairs(i, jl, ju);
        let n = pairs.len();

        // Validate the shape parameters early, with the same rules the
        // spectrum model enforces.
        VoigtProfile::new(guess.gaussian_fwhm_mhz, guess.lorentzian_fwhm_mhz)?;
        if !(guess.amplitude > 0.0) || !guess.amplitude.is_finite() {
            return Err(Error::NonPositive {
                name: "amplitude",
                value: guess.amplitude,
            });
        }
        for (name, v) in [
            ("a_lower", guess.a_lower_mhz),
            ("b_lower", guess.b_lower_mhz),
            ("a_upper", guess.a_upper_mhz),
            ("b_upper", guess.b_upper_mhz),
            ("cog", guess.cog_mhz),
            ("baseline_offset", guess.baseline_offset),
            ("baseline_slope", guess.baseline_slope),
        ] {
            if !v.is_finite() {
                return Err(Error::NonPositive { name, value: v });
            }
        }

        let mut intensities = match &guess.intensities {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::ParameterCount {
                        got: w.len(),
                        expected: n,
                    });
                }
                for &v in w {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::BadIntensities(
                            "initial intensities must be finite and non-negative",
                        ));
                    }
                }
                w.clone()
            }
            None => pairs
                .iter()
                .map(|&(f, fp)| relative_intensity(transition, f, fp))
                .collect::<Result<Vec<f64>>>()?,
        };
        let sum: f64 = intensities.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::BadIntensities("initial intensity sum not positive"));
        }
        for w in &mut intensities {
            *w /= sum;
        }

        let mut names = vec![
            "a_lower".to_owned(),
            "b_lower".to_owned(),
            "a_upper".to_owned(),
            "b_upper".to_owned(),
            "cog".to_owned(),
            "gaussian_fwhm".to_owned(),
            "lorentzian_fwhm".to_owned(),
            "amplitude".to_owned(),
        ];
        for &(f, fp) in &pairs {
            names.push(format!("intensity_{f}->{fp}"));
        }
        names.push("baseline_offset".to_owned());
        names.push("baseline_slope".to_owned());

        let mut initial = vec![
            guess.a_lower_mhz,
            guess.b_lower_mhz,
            guess.a_upper_mhz,
            guess.b_upper_mhz,
            guess.cog_mhz,
            guess.gaussian_fwhm_mhz,
            guess.lorentzian_fwhm_mhz,
            guess.amplitude,
        ];
        initial.extend(intensities);
        initial.push(guess.baseline_offset);
        initial.push(guess.baseline_slope);

        let mut fixed = vec![false; initial.len()];
        // Structural zeros of the shift formula; leaving these free would
        // put an exactly-zero column into the normal equations.
        let half = HalfInt::from_twice(1);
        if i <= half || jl <= half {
            fixed[IDX_B_LOWER] = true;
        }
        if i <= half || ju <= half {
            fixed[IDX_B_UPPER] = true;
        }
        if i == HalfInt::ZERO {
            fixed[IDX_A_LOWER] = true;
            fixed[IDX_A_UPPER] = true;
        }
        if guess.gaussian_fwhm_mhz == 0.0 {
            fixed[IDX_GAUSSIAN] = true;
        }
        if guess.lorentzian_fwhm_mhz == 0.0 {
            fixed[IDX_LORENTZIAN] = true;
        }

        Ok(FitProblem {
            nuclear_spin: i,
            j_lower: jl,
            j_upper: ju,
            pairs,
            names,
            freq: trace.abscissa(),
            data: trace.lif(),
            trace,
            initial,
            fixed,
        })
    }

    /// Total parameter count: 8 shape parameters, one intensity per
    /// component, 2 baseline parameters.
    pub fn parameter_count(&self) -> usize {
        N_SHAPE_PARAMS + self.pairs.len() + 2
    }

    pub fn parameter_names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The component (F, F') pairs, in the order of the intensity block.
    pub fn component_pairs(&self) -> &[(HalfInt, HalfInt)] {
        &self.pairs
    }

    pub fn initial_parameters(&self) -> &[f64] {
        &self.initial
    }

    pub fn fixed_mask(&self) -> &[bool] {
        &self.fixed
    }

    /// Freezes or frees one parameter by name.
    pub fn set_fixed(&mut self, name: &str, fixed: bool) -> Result<()> {
        let idx = self
            .index_of(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_owned()))?;
        self.fixed[idx] = fixed;
        Ok(())
    }

    /// Overrides one initial value by name (useful after construction, e.g.
    /// to pin a fixed parameter to a literature value).
    pub fn set_initial(&mut self, name: &str, value: f64) -> Result<()> {
        let idx = self
            .index_of(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_owned()))?;
        if !value.is_finite() {
            return Err(Error::NonPositive {
                name: "initial value",
                value,
            });
        }
        self.initial[idx] = value;
        Ok(())
    }

    // --- the forward model ---

    /// Component offsets from the centre of gravity for given constants,
    /// in pair order.
    fn offsets(&self, params: &[f64]) -> Result<Vec<f64>> {
        let lower = HfsConstants::new(params[IDX_A_LOWER], params[IDX_B_LOWER]);
        let upper = HfsConstants::new(params[IDX_A_UPPER], params[IDX_B_UPPER]);
        self.pairs
            .iter()
            .map(|&(f, fp)| {
                Ok(casimir_shift(self.nuclear_spin, self.j_upper, fp, upper)?
                    - casimir_shift(self.nuclear_spin, self.j_lower, f, lower)?)
            })
            .collect()
    }

    /// Evaluates the model on arbitrary frequencies for a full parameter
    /// vector, exactly as the optimizer sees it (intensities are used
    /// verbatim, without re-normalization). The term order matches the
    /// spectrum evaluator, so a parameter vector corresponding to a
    /// validated model reproduces its curve bit for bit.
    pub fn model_eval(&self, params: &[f64], frequencies_mhz: &[f64]) -> Result<Vec<f64>> {
        if params.len() != self.parameter_count() {
            return Err(Error::ParameterCount {
                got: params.len(),
                expected: self.parameter_count(),
            });
        }
        for &p in params {
            if !p.is_finite() {
                return Err(Error::BadIntensities("non-finite parameter"));
            }
        }
        let profile = VoigtProfile::new(params[IDX_GAUSSIAN], params[IDX_LORENTZIAN])?;
        let offsets = self.offsets(params)?;
        let n = self.pairs.len();
        let weights = &params[N_SHAPE_PARAMS..N_SHAPE_PARAMS + n];
        let (cog, amplitude) = (params[IDX_COG], params[IDX_AMPLITUDE]);
        let (base_off, base_slope) = (params[N_SHAPE_PARAMS + n], params[N_SHAPE_PARAMS + n + 1]);

        Ok(frequencies_mhz
            .iter()
            .map(|&nu| {
                let x0 = nu - cog;
                let mut value = base_off + base_slope * x0;
                for (w, off) in weights.iter().zip(&offsets) {
                    if *w != 0.0 {
                        value += amplitude * w * profile.eval(x0 - off);
                    }
                }
                value
            })
            .collect())
    }

    /// Converts a parameter vector into a validated spectrum model
    /// (normalizing intensities into the amplitude first).
    pub fn to_spectrum_model(&self, params: &[f64]) -> Result<SpectrumModel> {
        if params.len() != self.parameter_count() {
            return Err(Error::ParameterCount {
                got: params.len(),
                expected: self.parameter_count(),
            });
        }
        let offsets = self.offsets(params)?;
        let n = self.pairs.len();
        let components = self
            .pairs
            .iter()
            .zip(&offsets)
            .zip(&params[N_SHAPE_PARAMS..N_SHAPE_PARAMS + n])
            .map(|((&(f, fp), &offset_mhz), &rel_intensity)| HfsComponent {
                f_lower: f,
                f_upper: fp,
                offset_mhz,
                rel_intensity,
                diagonal: f.signed_twice_diff(fp) == self.j_lower.signed_twice_diff(self.j_upper),
            })
            .collect();
        let mut model = SpectrumModel {
            components,
            cog_mhz: params[IDX_COG],
            gaussian_fwhm_mhz: params[IDX_GAUSSIAN],
            lorentzian_fwhm_mhz: params[IDX_LORENTZIAN],
            amplitude: params[IDX_AMPLITUDE],
            baseline_offset: params[N_SHAPE_PARAMS + n],
            baseline_slope: params[N_SHAPE_PARAMS + n + 1],
        };
        model.normalize_intensities()?;
        model.validate()?;
        Ok(model)
    }

    fn chi_square(&self, params: &[f64]) -> Result<f64> {
        let model = self.model_eval(params, &self.freq)?;
        Ok(self
            .data
            .iter()
            .zip(&model)
            .map(|(d, m)| (d - m) * (d - m))
            .sum())
    }

    // --- internal (optimizer) coordinates ---

    // Fixed parameters skip the transform so they survive the fit bit for
    // bit (exp(ln w) can differ from w by an ulp).

    fn to_internal(&self, theta: &[f64]) -> Vec<f64> {
        let mut u = theta.to_vec();
        for idx in [IDX_GAUSSIAN, IDX_LORENTZIAN] {
            if !self.fixed[idx] {
                u[idx] = theta[idx].ln();
            }
        }
        u
    }

    // Named for symmetry with `to_internal`; it maps coordinates, not `self`.
    #[allow(clippy::wrong_self_convention)]
    fn from_internal(&self, u: &[f64]) -> Vec<f64> {
        let mut theta = u.to_vec();
        for idx in [IDX_GAUSSIAN, IDX_LORENTZIAN] {
            if !self.fixed[idx] {
                theta[idx] = u[idx].exp();
            }
        }
        theta
    }

    /// Projects a trial vector back onto the constraint set: free
    /// intensities are clamped non-negative and rescaled so the whole block
    /// sums to 1. When every intensity is free and the amplitude is too,
    /// the rescale factor is folded into the amplitude, leaving the
    /// physical curve untouched. Returns `false` for an unsalvageable trial
    /// (free intensities all zero, fixed ones already exceeding 1, or a
    /// free width outside [[`WIDTH_COLLAPSE_MHZ`], [`WIDTH_RUNAWAY_MHZ`]]).
    fn renormalize(&self, theta: &mut [f64]) -> bool {
        for k in [IDX_GAUSSIAN, IDX_LORENTZIAN] {
            if !self.fixed[k]
                && (theta[k].abs() > WIDTH_RUNAWAY_MHZ || theta[k] < WIDTH_COLLAPSE_MHZ)
            {
                return false;
            }
        }
        let n = self.pairs.len();
        let block = N_SHAPE_PARAMS..N_SHAPE_PARAMS + n;
        let any_free = block.clone().any(|k| !self.fixed[k]);
        if !any_free {
            return true; // fixed intensities are preserved bit for bit
        }
        let mut fixed_sum = 0.0;
        let mut free_sum = 0.0;
        for k in block.clone() {
            if self.fixed[k] {
                fixed_sum += theta[k];
            } else {
                if theta[k] < 0.0 {
                    theta[k] = 0.0;
                }
                free_sum += theta[k];
            }
        }
        let target = 1.0 - fixed_sum;
        if target < 0.0 || (target > 0.0 && free_sum <= 0.0) {
            return false;
        }
        if target == 0.0 {
            for k in block {
                if !self.fixed[k] {
                    theta[k] = 0.0;
                }
            }
            return true;
        }
        let scale = free_sum / target;
        for k in block.clone() {
            if !self.fixed[k] {
                theta[k] /= scale;
            }
        }
        let all_free = block.into_iter().all(|k| !self.fixed[k]);
        if all_free && !self.fixed[IDX_AMPLITUDE] {
            theta[IDX_AMPLITUDE] *= scale;
        }
        true
    }

    /// Forward-difference Jacobian d(model)/d(u) over the free coordinates,
    /// plus the model at the expansion point.
    fn jacobian(&self, u: &[f64], free_idx: &[usize]) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let theta0 = self.from_internal(u);
        let model0 = self.model_eval(&theta0, &self.freq)?;
        let mut jac = DMatrix::zeros(self.freq.len(), free_idx.len());
        for (col, &k) in free_idx.iter().enumerate() {
            let h = (FD_REL_STEP * u[k].abs()).max(FD_ABS_STEP);
            let mut u1 = u.to_vec();
            u1[k] += h;
            let theta1 = self.from_internal(&u1);
            let model1 = self.model_eval(&theta1, &self.freq)?;
            for (row, (m1, m0)) in model1.iter().zip(&model0).enumerate() {
                jac[(row, col)] = (m1 - m0) / h;
            }
        }
        Ok((jac, model0))
    }

    /// Runs the minimization. Hitting the iteration cap returns a result
    /// with `converged == false`; only structurally singular problems (a
    /// parameter with no effect on the model left free) are an error.
    pub fn fit(&self) -> Result<FitResult> {
        self.fit_from(&self.initial)
    }

    /// Runs the minimization after a coarse global search over the two
    /// magnetic-dipole constants.
    ///
    /// The chi-square surface of a multiplet fit is not single-welled in
    /// `a_lower` and `a_upper`: every way of pairing model components with
    /// peaks in the data produces its own local minimum, and the minima
    /// form a lattice with a spacing set by the component separations. A
    /// descent started more than about half that spacing from the truth
    /// settles into a neighbouring assignment and reports confidently wrong
    /// constants with structured residuals. Since the dipole constants
    /// control every splitting, scanning them is enough to land in the
    /// right well — the remaining parameters move the pattern rigidly or
    /// reshape it gently and do not re-pair components.
    ///
    /// The search evaluates raw chi-square on a `steps x steps` grid of
    /// scale factors `1 - span ..= 1 + span` applied to the starting
    /// `a_lower` and `a_upper` (a `steps`-point line if one of them is
    /// fixed, a plain [`FitProblem::fit`] if both are), then descends from
    /// the best cell. An odd `steps` keeps the unscaled start on the grid,
    /// so the result is never worse than the plain fit. Cost is one model
    /// evaluation per cell on top of the descent itself.
    pub fn fit_with_search(&self, span: f64, steps: usize) -> Result<FitResult> {
        if !(span > 0.0 && span < 1.0) {
            return Err(Error::SearchConfig("span must lie in (0, 1)"));
        }
        if steps < 2 {
            return Err(Error::SearchConfig("need at least 2 grid steps per axis"));
        }
        let scan: Vec<usize> = [IDX_A_LOWER, IDX_A_UPPER]
            .into_iter()
            .filter(|&k| !self.fixed[k])
            .collect();
        if scan.is_empty() {
            return self.fit_from(&self.initial);
        }
        let scales: Vec<f64> = (0..steps)
            .map(|s| 1.0 - span + 2.0 * span * s as f64 / (steps - 1) as f64)
            .collect();
        let inner: &[f64] = if scan.len() == 2 { &scales } else { &[1.0] };
        let mut best = self.initial.clone();
        let mut best_chi2 = f64::INFINITY;
        for &sl in &scales {
            for &su in inner {
                let mut theta = self.initial.clone();
                theta[scan[0]] *= sl;
                if scan.len() == 2 {
                    theta[scan[1]] *= su;
                }
                if let Ok(chi2) = self.chi_square(&theta) {
                    if chi2 < best_chi2 {
                        best_chi2 = chi2;
                        best = theta;
                    }
                }
            }
        }
        self.fit_from(&best)
    }

    /// Runs the minimization from an explicit starting vector (physical
    /// units, same layout as [`FitProblem::initial_parameters`]).
    fn fit_from(&self, start: &[f64]) -> Result<FitResult> {
        let n_params = self.parameter_count();
        let free_idx: Vec<usize> = (0..n_params).filter(|&k| !self.fixed[k]).collect();
        let n_free = free_idx.len();
        if self.data.len() <= n_free {
            return Err(Error::TooFewSamples {
                samples: self.data.len(),
                free: n_free,
                needed: n_free + 1,
            });
        }
        for (idx, name) in [(IDX_GAUSSIAN, "gaussian_fwhm"), (IDX_LORENTZIAN, "lorentzian_fwhm")] {
            if !self.fixed[idx] && start[idx] == 0.0 {
                return Err(Error::NonPositive {
                    name: match name {
                        "gaussian_fwhm" => "free gaussian_fwhm start",
                        _ => "free lorentzian_fwhm start",
                    },
                    value: 0.0,
                });
            }
        }
        {
            // A feasibility check renormalize() would otherwise hit on
            // every single trial.
            let fixed_sum: f64 = (N_SHAPE_PARAMS..N_SHAPE_PARAMS + self.pairs.len())
                .filter(|&k| self.fixed[k])
                .map(|k| start[k])
                .sum();
            if fixed_sum > 1.0 + 1e-9 {
                return Err(Error::BadIntensities("fixed intensities sum to more than 1"));
            }
        }

        let mut u = self.to_internal(start);
        let mut theta = self.from_internal(&u);
        let mut chi2 = self.chi_square(&theta)?;
        let mut history = vec![chi2];
        let mut lambda = INITIAL_LAMBDA;
        // Damping growth factor, doubled on consecutive rejections
        // (Nielsen's schedule); acceptance shrinks lambda by the cubic
        // gain-ratio rule, which lets the step length grow quickly along
        // shallow curved valleys instead of creeping.
        let mut nu = LAMBDA_RATIO;
        let mut small_steps = 0usize;
        let mut iterations = 0usize;
        let mut converged = n_free == 0;

        'outer: while !converged && iterations < MAX_ITERATIONS {
            iterations += 1;
            let (jac, model0) = self.jacobian(&u, &free_idx)?;
            let r = DVector::from_iterator(
                self.data.len(),
                self.data.iter().zip(&model0).map(|(d, m)| d - m),
            );
            let jtj = jac.transpose() * &jac;
            let jtr = jac.transpose() * r;

            loop {
                let mut damped = jtj.clone();
                for k in 0..n_free {
                    damped[(k, k)] += lambda * jtj[(k, k)];
                }
                let delta = Cholesky::new(damped)
                    .map(|ch| ch.solve(&jtr))
                    .filter(|d| d.iter().all(|v| v.is_finite()));
                let Some(delta) = delta else {
                    lambda *= nu;
                    nu *= 2.0;
                    if lambda > LAMBDA_MAX {
                        return Err(Error::SingularNormalEquations(
                            "normal matrix not positive definite at maximum damping \
                             (a free parameter has no effect on the model)",
                        ));
                    }
                    continue;
                };
                if delta.norm() < STEP_NORM_TOL {
                    converged = true;
                    break 'outer;
                }

                let mut u_trial = u.clone();
                for (col, &k) in free_idx.iter().enumerate() {
                    u_trial[k] += delta[col];
                }
                let mut theta_trial = self.from_internal(&u_trial);
                let feasible = self.renormalize(&mut theta_trial);
                let chi2_trial = if feasible {
                    self.chi_square(&theta_trial).unwrap_or(f64::INFINITY)
                } else {
                    f64::INFINITY
                };

                if chi2_trial < chi2 {
                    let rel = (chi2 - chi2_trial) / chi2;
                    // Gain ratio: actual decrease over the decrease the
                    // linearized model predicted for this step.
                    let mut predicted = 0.0;
                    for (col, _) in free_idx.iter().enumerate() {
                        predicted +=
                            delta[col] * (lambda * jtj[(col, col)] * delta[col] + jtr[col]);
                    }
                    let rho = if predicted > 0.0 {
                        (chi2 - chi2_trial) / predicted
                    } else {
                        0.5
                    };
                    theta = theta_trial;
                    u = self.to_internal(&theta);
                    chi2 = chi2_trial;
                    history.push(chi2);
                    let shrink = (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                    lambda = (lambda * shrink).max(1e-12);
                    nu = LAMBDA_RATIO;
                    if rel < REL_CHI2_TOL {
                        small_steps += 1;
                        if small_steps >= SMALL_STEPS_TO_CONVERGE {
                            converged = true;
                        }
                    } else {
                        small_steps = 0;
                    }
                    break;
                }
                lambda *= nu;
                nu *= 2.0;
                if lambda > LAMBDA_MAX {
                    return Err(Error::SingularNormalEquations(
                        "no downhill step found at maximum damping",
                    ));
                }
            }
        }

        // Uncertainties: sigma^2 (J^T J)^+ on the free block. The inversion
        // happens on the correlation-normalized matrix (unit diagonal) so
        // that the rank cutoff is scale-invariant: it removes only the
        // exact amplitude/intensity scaling degeneracy (a true null
        // direction of the raw Jacobian, eliminated physically by the
        // re-normalization), never a merely weak direction.
        let dof = self.data.len() - n_free;
        let mut sigmas: Vec<Option<f64>> = vec![None; n_params];
        if converged && n_free > 0 && dof > 0 {
            let (jac, _) = self.jacobian(&u, &free_idx)?;
            let jtj = jac.transpose() * &jac;
            let noise_var = chi2 / dof as f64;
            let scale: Vec<f64> = (0..n_free).map(|k| jtj[(k, k)].sqrt()).collect();
            if scale.iter().all(|&s| s > 0.0 && s.is_finite()) {
                let mut corr = jtj;
                for r in 0..n_free {
                    for c in 0..n_free {
                        corr[(r, c)] /= scale[r] * scale[c];
                    }
                }
                if let Some(eig) =
                    nalgebra::linalg::SymmetricEigen::try_new(corr, f64::EPSILON, 10_000)
                {
                    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
                    for (col, &k) in free_idx.iter().enumerate() {
                        let mut cov_kk = 0.0;
                        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                            if lam > RANK_TOL * lambda_max {
                                let q = eig.eigenvectors[(col, i)];
                                cov_kk += q * q / lam;
                            }
                        }
                        let sigma_u = (noise_var * cov_kk).sqrt() / scale[col];
                        // Log-width coordinates: sigma_w = w * sigma_ln(w).
                        sigmas[k] = Some(if k == IDX_GAUSSIAN || k == IDX_LORENTZIAN {
                            theta[k] * sigma_u
                        } else {
                            sigma_u
                        });
                    }
                }
            }
        }

        let parameters = self
            .names
            .iter()
            .enumerate()
            .map(|(k, name)| FittedParameter {
                name: name.clone(),
                value: theta[k],
                sigma: sigmas[k],
                fixed: self.fixed[k],
            })
            .collect();

        let model = self.model_eval(&theta, &self.freq)?;
        let residual: Vec<f64> = self.data.iter().zip(&model).map(|(d, m)| d - m).collect();
        let deviation = Trace::from_columns(
            self.freq.clone(),
            residual,
            None,
            self.trace.frequency_axis_valid,
        )?;

        Ok(FitResult {
            parameters,
            chi_square: chi2,
            degrees_of_freedom: dof,
            iterations,
            converged,
            deviation,
            chi_square_history: history,
        })
    }
}

/// Signal-to-noise ratio of a fitted scan: the peak height of the fitted
/// curve above its own baseline, divided by the RMS of the fit residuals.
/// A residual-free fit returns `f64::INFINITY`.
pub fn snr_estimate(trace: &Trace, fit: &FitResult) -> Result<f64> {
    let dev = fit.deviation.lif();
    if dev.len() != trace.len() {
        return Err(Error::LengthMismatch {
            expected: trace.len(),
            got: dev.len(),
        });
    }
    let (cog, offset, slope) = match (
        fit.value("cog"),
        fit.value("baseline_offset"),
        fit.value("baseline_slope"),
    ) {
        (Some(c), Some(o), Some(s)) => (c, o, s),
        _ => return Err(Error::UnknownParameter("baseline_offset".to_owned())),
    };

    let freq = trace.abscissa();
    let lif = trace.lif();
    let mut peak: f64 = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..lif.len() {
        let model = lif[k] - dev[k];
        let baseline = offset + slope * (freq[k] - cog);
        peak = peak.max(model - baseline);
        sum_sq += dev[k] * dev[k];
    }
    let rms = (sum_sq / lif.len() as f64).sqrt();
    if rms == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(peak / rms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfs::{enumerate_components, Level, Parity};
    use crate::lineshape::{synthesize, Noise};

    /// I = 5/2, J = 1/2 -> 3/2: six components. B of the lower level is a
    /// structural zero (J = 1/2).
    fn test_transition(a_l: f64, a_u: f64, b_u: f64) -> Transition {
        let lower = Level::new(
            "low",
            1000.0,
            HalfInt::from_twice(1),
            Parity::Even,
            Some(HfsConstants::new(a_l, 0.0)),
        )
        .unwrap();
        let upper = Level::new(
            "up",
            10000.0,
            HalfInt::from_twice(3),
            Parity::Odd,
            Some(HfsConstants::new(a_u, b_u)),
        )
        .unwrap();
        Transition::new(lower, upper, HalfInt::from_twice(5)).unwrap()
    }

    fn truth_model(t: &Transition) -> SpectrumModel {
        SpectrumModel {
            components: enumerate_components(t).unwrap(),
            cog_mhz: 120.0,
            gaussian_fwhm_mhz: 350.0,
            lorentzian_fwhm_mhz: 80.0,
            amplitude: 5.0,
            baseline_offset: 1.0,
            baseline_slope: 2e-4,
        }
    }

    fn axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    fn exact_guess(model: &SpectrumModel, t: &Transition) -> InitialGuess {
        let lower = t.lower().hfs.unwrap();
        let upper = t.upper().hfs.unwrap();
        InitialGuess {
            a_lower_mhz: lower.a_mhz,
            b_lower_mhz: lower.b_mhz,
            a_upper_mhz: upper.a_mhz,
            b_upper_mhz: upper.b_mhz,
            cog_mhz: model.cog_mhz,
            gaussian_fwhm_mhz: model.gaussian_fwhm_mhz,
            lorentzian_fwhm_mhz: model.lorentzian_fwhm_mhz,
            amplitude: model.amplitude,
            intensities: None,
            baseline_offset: model.baseline_offset,
            baseline_slope: model.baseline_slope,
        }
    }

    #[test]
    fn parameter_layout_and_names() {
        let t = test_transition(400.0, 300.0, 50.0);
        let trace = synthesize(&truth_model(&t), &axis(40, -3000.0, 1700.0), &Noise::None).unwrap();
        let p = FitProblem::new(&t, trace, &exact_guess(&truth_model(&t), &t)).unwrap();
        assert_eq!(p.parameter_count(), 16);
        assert_eq!(
            p.parameter_names(),
            &[
                "a_lower",
                "b_lower",
                "a_upper",
                "b_upper",
                "cog",
                "gaussian_fwhm",
                "lorentzian_fwhm",
                "amplitude",
                "intensity_2->1",
                "intensity_2->2",
                "intensity_2->3",
                "intensity_3->2",
                "intensity_3->3",
                "intensity_3->4",
                "baseline_offset",
                "baseline_slope"
            ]
        );
        assert_eq!(p.index_of("cog"), Some(4));
        assert_eq!(p.index_of("nope"), None);
        // Structural zero: B of a J = 1/2 level starts fixed.
        assert!(p.fixed_mask()[1]);
        assert!(!p.fixed_mask()[3]);
    }

    #[test]
    fn model_eval_matches_spectrum_evaluator_bitwise() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let grid = axis(200, -3000.0, 1700.0);
        let trace = synthesize(&model, &grid, &Noise::None).unwrap();
        let p = FitProblem::new(&t, trace.clone(), &exact_guess(&model, &t)).unwrap();
        let ours = p.model_eval(p.initial_parameters(), &grid).unwrap();
        for (a, b) in ours.iter().zip(trace.lif()) {
            assert_eq!(*a, b, "fitter forward model must equal the synthesizer");
        }
    }

    #[test]
    fn noiseless_round_trip_recovers_truth() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(&model, &axis(300, -3000.0, 1700.0), &Noise::None).unwrap();

        let mut guess = exact_guess(&model, &t);
        guess.a_lower_mhz *= 1.06;
        guess.a_upper_mhz *= 0.94;
        guess.b_upper_mhz = 20.0;
        guess.cog_mhz += 40.0;
        guess.gaussian_fwhm_mhz *= 1.1;
        guess.lorentzian_fwhm_mhz *= 0.8;
        guess.amplitude *= 1.3;
        guess.baseline_offset = 0.7;

        let problem = FitProblem::new(&t, trace, &guess).unwrap();
        let fit = problem.fit().unwrap();
        assert!(fit.converged, "history: {:?}", fit.chi_square_history);
        assert!(fit.chi_square < 1e-10, "chi2 = {}", fit.chi_square);
        assert!((fit.value("a_lower").unwrap() - 400.0).abs() < 1e-3);
        assert!((fit.value("a_upper").unwrap() - 300.0).abs() < 1e-3);
        assert!((fit.value("b_upper").unwrap() - 50.0).abs() < 1e-2);
        assert!((fit.value("cog").unwrap() - 120.0).abs() < 1e-3);
        assert!((fit.value("gaussian_fwhm").unwrap() - 350.0).abs() < 0.1);
        assert!((fit.value("lorentzian_fwhm").unwrap() - 80.0).abs() < 0.1);
        // B of the lower level never moved (structurally fixed).
        assert_eq!(fit.value("b_lower").unwrap(), 0.0);
        assert!(fit.parameter("b_lower").unwrap().fixed);
        // Chi-square history is monotone non-increasing.
        for w in fit.chi_square_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn noisy_fit_reports_sane_uncertainties() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let sigma = 0.07; // peak amplitude 5 -> S/N of order 70
        let trace = synthesize(
            &model,
            &axis(400, -3000.0, 1700.0),
            &Noise::Gaussian { sigma, seed: 11 },
        )
        .unwrap();

        let mut guess = exact_guess(&model, &t);
        guess.a_lower_mhz *= 1.05;
        guess.cog_mhz -= 30.0;
        let problem = FitProblem::new(&t, trace.clone(), &guess).unwrap();
        let fit = problem.fit().unwrap();
        assert!(fit.converged);

        let a = fit.parameter("a_lower").unwrap();
        let sa = a.sigma.expect("converged fit must report sigma");
        assert!(sa > 0.0 && sa < 20.0, "sigma_a = {sa}");
        assert!((a.value - 400.0).abs() < 5.0 * sa, "a = {} +- {sa}", a.value);

        // Residual RMS should reconstruct the injected noise level.
        let rms = (fit.chi_square / trace.len() as f64).sqrt();
        assert!((rms - sigma).abs() < 0.35 * sigma, "rms {rms} vs sigma {sigma}");

        let snr = snr_estimate(&trace, &fit).unwrap();
        assert!(snr > 20.0 && snr < 250.0, "snr = {snr}");
    }

    #[test]
    fn fixed_parameters_are_preserved_exactly() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(
            &model,
            &axis(250, -3000.0, 1700.0),
            &Noise::Gaussian {
                sigma: 0.05,
                seed: 5,
            },
        )
        .unwrap();
        let mut guess = exact_guess(&model, &t);
        guess.a_upper_mhz = 290.0;
        let mut problem = FitProblem::new(&t, trace, &guess).unwrap();
        problem.set_fixed("lorentzian_fwhm", true).unwrap();
        problem.set_fixed("intensity_2->1", true).unwrap();
        let w0 = problem.initial_parameters()[problem.index_of("intensity_2->1").unwrap()];

        let fit = problem.fit().unwrap();
        assert!(fit.converged);
        let l = fit.parameter("lorentzian_fwhm").unwrap();
        assert_eq!(l.value, 80.0);
        assert!(l.fixed && l.sigma.is_none());
        assert_eq!(fit.value("intensity_2->1").unwrap(), w0);
        // Free intensities still sum with the fixed one to exactly 1.
        let total: f64 = fit
            .parameters
            .iter()
            .filter(|p| p.name.starts_with("intensity_"))
            .map(|p| p.value)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translation_equivariance() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let shift = 4.0e5;

        let run = |delta: f64| {
            let grid = axis(220, -3000.0 + delta, 1700.0 + delta);
            let mut m = model.clone();
            m.cog_mhz += delta;
            let trace = synthesize(&m, &grid, &Noise::None).unwrap();
            let mut guess = exact_guess(&model, &t);
            guess.cog_mhz += delta + 25.0;
            guess.a_lower_mhz *= 1.04;
            FitProblem::new(&t, trace, &guess).unwrap().fit().unwrap()
        };
        let base = run(0.0);
        let moved = run(shift);
        assert!(base.converged && moved.converged);
        assert!(
            (moved.value("cog").unwrap() - base.value("cog").unwrap() - shift).abs() < 1e-3
        );
        assert!((moved.value("a_lower").unwrap() - base.value("a_lower").unwrap()).abs() < 1e-4);
        assert!(
            (moved.value("gaussian_fwhm").unwrap() - base.value("gaussian_fwhm").unwrap()).abs()
                < 1e-3
        );
    }

    #[test]
    fn fit_is_bit_reproducible() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(
            &model,
            &axis(200, -3000.0, 1700.0),
            &Noise::Gaussian {
                sigma: 0.05,
                seed: 13,
            },
        )
        .unwrap();
        let mut guess = exact_guess(&model, &t);
        guess.cog_mhz += 50.0;
        let fit1 = FitProblem::new(&t, trace.clone(), &guess).unwrap().fit().unwrap();
        let fit2 = FitProblem::new(&t, trace, &guess).unwrap().fit().unwrap();
        assert_eq!(fit1.chi_square, fit2.chi_square);
        for (a, b) in fit1.parameters.iter().zip(&fit2.parameters) {
            assert_eq!(a.value, b.value);
            assert_eq!(a.sigma, b.sigma);
        }
    }

    #[test]
    fn snr_of_residual_free_fit_is_infinite() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(&model, &axis(150, -3000.0, 1700.0), &Noise::None).unwrap();
        let fit = FitProblem::new(&t, trace.clone(), &exact_guess(&model, &t))
            .unwrap()
            .fit()
            .unwrap();
        // The exact start fits with zero (machine-level) residuals.
        if fit.chi_square == 0.0 {
            assert!(snr_estimate(&trace, &fit).unwrap().is_infinite());
        } else {
            assert!(snr_estimate(&trace, &fit).unwrap() > 1e5);
        }
    }

    #[test]
    fn unfixing_a_structural_zero_is_singular() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(&model, &axis(100, -3000.0, 1700.0), &Noise::None).unwrap();
        let mut problem = FitProblem::new(&t, trace, &exact_guess(&model, &t)).unwrap();
        problem.set_fixed("b_lower", false).unwrap();
        // Start slightly off so the fit cannot converge before touching the
        // singular direction.
        problem.set_initial("cog", 200.0).unwrap();
        match problem.fit() {
            Err(Error::SingularNormalEquations(_)) => {}
            other => panic!("expected singular normal equations, got {other:?}"),
        }
    }

    #[test]
    fn input_validation() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let guess = exact_guess(&model, &t);

        // Index axis: refused.
        let grid = axis(50, -3000.0, 1700.0);
        let trace = synthesize(&model, &grid, &Noise::None).unwrap();
        let index_trace = trace
            .with_abscissa(&(0..50).map(|k| k as f64).collect::<Vec<_>>(), false)
            .unwrap();
        assert!(matches!(
            FitProblem::new(&t, index_trace, &guess),
            Err(Error::MissingFrequencyAxis)
        ));

        // Wrong intensity count.
        let mut bad = guess.clone();
        bad.intensities = Some(vec![1.0; 4]);
        assert!(matches!(
            FitProblem::new(&t, trace.clone(), &bad),
            Err(Error::ParameterCount {
                got: 4,
                expected: 6
            })
        ));

        // Too few samples for the free parameter count.
        let tiny = synthesize(&model, &axis(10, -3000.0, 1700.0), &Noise::None).unwrap();
        let problem = FitProblem::new(&t, tiny, &guess).unwrap();
        assert!(matches!(problem.fit(), Err(Error::TooFewSamples { .. })));

        // Unknown parameter names.
        let mut problem = FitProblem::new(&t, trace, &guess).unwrap();
        assert!(matches!(
            problem.set_fixed("gamma", true),
            Err(Error::UnknownParameter(_))
        ));
        assert!(problem.set_fixed("amplitude", true).is_ok());

        // Wrong-length parameter vector to the evaluator.
        assert!(matches!(
            problem.model_eval(&[0.0; 3], &[0.0]),
            Err(Error::ParameterCount { .. })
        ));
    }

    #[test]
    fn assignment_search_recovers_a_wrong_basin_start() {
        let t = test_transition(400.0, 300.0, 50.0);
        // Narrow, well-resolved lines make the assignment minima deep and
        // far apart: a 25% error in the dipole constants moves every
        // component by several widths, so a purely local descent pairs the
        // model with the wrong peaks.
        let mut model = truth_model(&t);
        model.gaussian_fwhm_mhz = 120.0;
        model.lorentzian_fwhm_mhz = 30.0;
        let trace = synthesize(
            &model,
            &axis(900, -3000.0, 1700.0),
            &Noise::Gaussian {
                sigma: 0.02,
                seed: 21,
            },
        )
        .unwrap();

        let mut guess = exact_guess(&model, &t);
        guess.a_lower_mhz *= 1.25;
        guess.a_upper_mhz *= 0.75;
        let problem = FitProblem::new(&t, trace, &guess).unwrap();

        let searched = problem.fit_with_search(0.3, 13).unwrap();
        assert!(searched.converged);
        assert!(
            (searched.value("a_lower").unwrap() - 400.0).abs() < 2.0,
            "a_lower = {}",
            searched.value("a_lower").unwrap()
        );
        assert!(
            (searched.value("a_upper").unwrap() - 300.0).abs() < 2.0,
            "a_upper = {}",
            searched.value("a_upper").unwrap()
        );

        // The plain local fit from the same start must not do better: it
        // either fails outright or stalls in a worse minimum.
        match problem.fit() {
            Err(_) => {}
            Ok(plain) => assert!(
                plain.chi_square > 2.0 * searched.chi_square,
                "local fit found chi2 {} vs searched {}",
                plain.chi_square,
                searched.chi_square
            ),
        }
    }

    #[test]
    fn assignment_search_without_free_dipole_constants_is_a_plain_fit() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(
            &model,
            &axis(200, -3000.0, 1700.0),
            &Noise::Gaussian {
                sigma: 0.05,
                seed: 7,
            },
        )
        .unwrap();
        let mut guess = exact_guess(&model, &t);
        guess.cog_mhz += 30.0;
        let mut problem = FitProblem::new(&t, trace, &guess).unwrap();
        problem.set_fixed("a_lower", true).unwrap();
        problem.set_fixed("a_upper", true).unwrap();

        let plain = problem.fit().unwrap();
        let searched = problem.fit_with_search(0.3, 9).unwrap();
        assert_eq!(plain.chi_square, searched.chi_square);
        for (a, b) in plain.parameters.iter().zip(&searched.parameters) {
            assert_eq!(a.value, b.value);
            assert_eq!(a.sigma, b.sigma);
        }
    }

    #[test]
    fn search_settings_are_validated() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(&model, &axis(60, -3000.0, 1700.0), &Noise::None).unwrap();
        let problem = FitProblem::new(&t, trace, &exact_guess(&model, &t)).unwrap();
        for span in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(
                problem.fit_with_search(span, 9),
                Err(Error::SearchConfig(_))
            ));
        }
        for steps in [0, 1] {
            assert!(matches!(
                problem.fit_with_search(0.1, steps),
                Err(Error::SearchConfig(_))
            ));
        }
    }

    #[test]
    fn to_spectrum_model_round_trips() {
        let t = test_transition(400.0, 300.0, 50.0);
        let model = truth_model(&t);
        let trace = synthesize(&model, &axis(60, -3000.0, 1700.0), &Noise::None).unwrap();
        let p = FitProblem::new(&t, trace, &exact_guess(&model, &t)).unwrap();
        let rebuilt = p.to_spectrum_model(p.initial_parameters()).unwrap();
        assert_eq!(rebuilt.components.len(), 6);
        for (a, b) in rebuilt.components.iter().zip(&model.components) {
            assert_eq!(a.f_lower, b.f_lower);
            assert_eq!(a.f_upper, b.f_upper);
            assert!((a.offset_mhz - b.offset_mhz).abs() < 1e-9);
            assert!((a.rel_intensity - b.rel_intensity).abs() < 1e-12);
            assert_eq!(a.diagonal, b.diagonal);
        }
        assert!((rebuilt.eval(0.0).unwrap() - model.eval(0.0).unwrap()).abs() < 1e-12);
    }
}
