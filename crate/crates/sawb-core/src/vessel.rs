//! Closed-form frequency response functions for a small box-like USV.
//!
//! Heave and pitch follow a second-order equation of motion with
//! frequency-dependent inertia, damping, and forcing coefficients built from
//! the hull's main dimensions; roll uses a two-prism hull decomposition with
//! a wave-making damping estimate and a Froude-Krylov excitation moment. All
//! coefficient evaluation is concentrated in [`hull_coefficients`] so an
//! alternative hull model can be swapped in without touching the EOM solver.

use crate::{Error, Result, GRAVITY, RHO_SEA};

/// Floor applied to |encounter frequency| before it enters coefficient
/// evaluation or response synthesis. Following seas can bring the encounter
/// frequency of individual components arbitrarily close to zero; those
/// components carry negligible spectral weight and are clamped rather than
/// allowed to blow up the damping term.
pub const OMEGA_E_FLOOR: f64 = 1e-3;

/// Roll natural period coefficient in `T_N = 2 c B / sqrt(GM_T)`.
const ROLL_PERIOD_COEFF: f64 = 0.78;

/// Breadth ratio of the aft prism in the two-prism roll hull decomposition.
const ROLL_PRISM_BREADTH_RATIO: f64 = 0.5;

/// Main particulars of the simulated vessel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselParams {
    /// Length (m).
    pub length: f64,
    /// Breadth (m).
    pub breadth: f64,
    /// Draught (m).
    pub draught: f64,
    /// Waterplane coefficient.
    pub c_wp: f64,
    /// Block coefficient.
    pub c_b: f64,
    /// Displacement (kg).
    pub displacement: f64,
    /// Transverse metacentric height (m).
    pub gm_t: f64,
}

impl VesselParams {
    pub fn new(
        length: f64,
        breadth: f64,
        draught: f64,
        c_wp: f64,
        c_b: f64,
        displacement: f64,
        gm_t: f64,
    ) -> Result<Self> {
        let p = VesselParams {
            length,
            breadth,
            draught,
            c_wp,
            c_b,
            displacement,
            gm_t,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("breadth", self.breadth),
            ("draught", self.draught),
            ("displacement", self.displacement),
            ("gm_t", self.gm_t),
        ] {
            if !(v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.c_wp > 0.0 && self.c_wp <= 1.0) {
            return Err(Error::domain(format!(
                "waterplane coefficient must be in (0, 1], got {}",
                self.c_wp
            )));
        }
        if !(self.c_b > 0.0 && self.c_b <= 1.0) {
            return Err(Error::domain(format!(
                "block coefficient must be in (0, 1], got {}",
                self.c_b
            )));
        }
        Ok(())
    }
}

impl Default for VesselParams {
    /// The small USV used for the simulation campaign.
    fn default() -> Self {
        VesselParams {
            length: 2.05,
            breadth: 0.61,
            draught: 0.16,
            c_wp: 0.877,
            c_b: 0.731,
            displacement: 150.0,
            gm_t: 0.264,
        }
    }
}

/// Vessel motion degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dof {
    Heave,
    Pitch,
    Roll,
}

impl Dof {
    /// All DOFs in the fixed feature ordering.
    pub const ALL: [Dof; 3] = [Dof::Heave, Dof::Pitch, Dof::Roll];

    pub fn name(self) -> &'static str {
        match self {
            Dof::Heave => "heave",
            Dof::Pitch => "pitch",
            Dof::Roll => "roll",
        }
    }
}

/// One evaluated frequency response point.
///
/// `magnitude` is response per unit wave amplitude: m/m for heave, rad/m for
/// pitch and roll. `omega_e` keeps its physical sign; the clamped absolute
/// value used internally is available through [`clamped_omega_e`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrfPoint {
    pub omega: f64,
    pub omega_e: f64,
    pub magnitude: f64,
    pub phase: f64,
}

/// Deep-water wavenumber `k = ω²/g`.
pub fn deep_water_wavenumber(omega: f64) -> f64 {
    omega * omega / GRAVITY
}

/// Encounter frequency `ω_e = ω − k U cos(μ_h)` (signed).
///
/// Heading is in degrees on [0, 180]: 180° head seas, 0° following seas.
pub fn encounter_frequency(omega: f64, u: f64, mu_h_deg: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!(
            "wave frequency must be positive, got {omega}"
        )));
    }
    if !(u >= 0.0) {
        return Err(Error::domain(format!("speed must be non-negative, got {u}")));
    }
    if !(0.0..=180.0).contains(&mu_h_deg) {
        return Err(Error::domain(format!(
            "relative heading must be within [0, 180] degrees, got {mu_h_deg}"
        )));
    }
    let k = deep_water_wavenumber(omega);
    Ok(omega - k * u * heading_cos(mu_h_deg))
}

/// |ω_e| with the degeneracy floor applied.
pub fn clamped_omega_e(omega_e: f64) -> f64 {
    omega_e.abs().max(OMEGA_E_FLOOR)
}

/// cos of the heading, exact at the beam-sea boundary.
///
/// Evaluated as −sin((μ − 90)°) so that 90° yields exactly zero; beam-sea
/// responses are speed-independent bit for bit, not just approximately.
fn heading_cos(mu_h_deg: f64) -> f64 {
    -((mu_h_deg - 90.0).to_radians().sin())
}

/// sin of the heading, exact at beam sea.
fn heading_sin(mu_h_deg: f64) -> f64 {
    (mu_h_deg - 90.0).to_radians().cos()
}

/// `sin(u)/u` with the series limit at small argument.
fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// `3 (sin u − u cos u) / u³`, the lengthwise moment integration factor;
/// tends to 1 as u → 0.
fn moment_sinc(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        1.0 - u * u / 10.0
    } else {
        3.0 * (u.sin() - u * u.cos()) / (u * u * u)
    }
}

/// Second-order EOM coefficients for one DOF at one wave component:
/// `inertia·ẍ + damping·ẋ + stiffness·x = amplitude·forcing·cos(ω_e t)`.
struct EomCoefficients {
    inertia: f64,
    damping: f64,
    stiffness: f64,
    forcing: f64,
}

/// Geometry of the two-prism hull decomposition used by the roll model.
///
/// Both prisms share an effective draught `T·C_b/C_wp`; the aft prism
/// breadth is scaled by a fixed ratio and the lengths are solved so the
/// combined waterplane area and displaced volume match the full hull.
#[derive(Debug, Clone, Copy)]
pub struct RollGeometry {
    pub breadth_ratio: f64,
    pub fore_length: f64,
    pub aft_length: f64,
    pub fore_breadth: f64,
    pub aft_breadth: f64,
    pub draught: f64,
    /// Natural roll period (s).
    pub natural_period: f64,
    /// Restoring moment coefficient `g Δ GM_T` (N·m/rad).
    pub restoring: f64,
}

/// Derives the roll-model geometry from the vessel particulars.
pub fn roll_geometry(vessel: &VesselParams) -> Result<RollGeometry> {
    vessel.validate()?;
    let delta = ROLL_PRISM_BREADTH_RATIO;
    if vessel.c_wp <= delta {
        return Err(Error::domain(format!(
            "two-prism roll split needs waterplane coefficient above {delta}, got {}",
            vessel.c_wp
        )));
    }
    let fore_length = vessel.length * (vessel.c_wp - delta) / (1.0 - delta);
    RollGeometry::build(vessel, delta, fore_length)
}

impl RollGeometry {
    fn build(vessel: &VesselParams, delta: f64, fore_length: f64) -> Result<Self> {
        let aft_length = vessel.length - fore_length;
        let draught = vessel.draught * vessel.c_b / vessel.c_wp;
        let natural_period = 2.0 * ROLL_PERIOD_COEFF * vessel.breadth / vessel.gm_t.sqrt();
        let restoring = GRAVITY * vessel.displacement * vessel.gm_t;
        Ok(RollGeometry {
            breadth_ratio: delta,
            fore_length,
            aft_length,
            fore_breadth: vessel.breadth,
            aft_breadth: delta * vessel.breadth,
            draught,
            natural_period,
            restoring,
        })
    }

    /// Waterplane area of the two prisms combined (m²).
    pub fn waterplane_area(&self) -> f64 {
        self.fore_length * self.fore_breadth + self.aft_length * self.aft_breadth
    }

    /// Displaced volume of the two prisms combined (m³).
    pub fn displaced_volume(&self) -> f64 {
        self.waterplane_area() * self.draught
    }
}

/// Wave-making roll damping of the two-prism hull at encounter frequency
/// (kg·m²/s). Each waterline edge radiates like a heaving strip with the
/// half-breadth as lever; the extra `sin` factor captures the antisymmetric
/// (dipole) radiation inefficiency of roll at low frequency.
fn roll_damping(geometry: &RollGeometry, omega_e: f64) -> f64 {
    let we2 = omega_e * omega_e;
    let decay = (-we2 * geometry.draught / GRAVITY).exp();
    let prism = |length: f64, breadth: f64| {
        let s = (we2 * breadth / (2.0 * GRAVITY)).sin();
        let ratio = 2.0 * s * s * decay * (breadth / 2.0);
        length * ratio * ratio
    };
    let sum = prism(geometry.fore_length, geometry.fore_breadth)
        + prism(geometry.aft_length, geometry.aft_breadth);
    RHO_SEA * GRAVITY * GRAVITY / (omega_e * omega_e * omega_e) * sum
}

/// Evaluates the EOM coefficients for one (DOF, wave component, speed,
/// heading) combination. All hull-model closed forms live here.
fn hull_coefficients(
    vessel: &VesselParams,
    dof: Dof,
    omega: f64,
    omega_e_abs: f64,
    mu_h_deg: f64,
) -> Result<EomCoefficients> {
    let k = deep_water_wavenumber(omega);
    match dof {
        Dof::Heave | Dof::Pitch => {
            let alpha = omega_e_abs / omega;
            let kt = k * vessel.draught;
            let kb = k * vessel.breadth;
            // Sectional hydrodynamic damping ratio at encounter frequency
            // (k·α² = ω_e²/g).
            let q = 2.0 * (kb * alpha * alpha / 2.0).sin() * (-kt * alpha * alpha).exp();
            let damping_ratio = q * q / (kb * alpha * alpha * alpha);
            // Smith-effect depth attenuation and sectional force correction.
            let kappa = (-kt).exp();
            let f_sec = ((1.0 - kt) * (1.0 - kt) + damping_ratio * damping_ratio).sqrt();
            // Lengthwise integration of sectional forcing at the effective
            // wavenumber along the hull axis.
            let k_e = k * heading_cos(mu_h_deg).abs();
            let half = k_e * vessel.length / 2.0;
            let forcing = match dof {
                Dof::Heave => kappa * f_sec * sinc(half),
                Dof::Pitch => kappa * f_sec * k_e * moment_sinc(half),
                Dof::Roll => unreachable!(),
            };
            Ok(EomCoefficients {
                inertia: 2.0 * kt / (omega * omega),
                damping: damping_ratio / omega,
                stiffness: 1.0,
                forcing,
            })
        }
        Dof::Roll => {
            let geometry = roll_geometry(vessel)?;
            let inertia_coeff = geometry.natural_period / std::f64::consts::TAU;
            // Froude-Krylov roll moment: restoring coefficient times the
            // athwartships wave slope, attenuated over the prism draught.
            let forcing = geometry.restoring
                * k
                * heading_sin(mu_h_deg).abs()
                * (-k * geometry.draught).exp();
            Ok(EomCoefficients {
                inertia: inertia_coeff * inertia_coeff * geometry.restoring,
                damping: roll_damping(&geometry, omega_e_abs),
                stiffness: geometry.restoring,
                forcing,
            })
        }
    }
}

/// Steady-state amplitude ratio and phase of the vessel response to a unit
/// wave component.
pub fn frf(
    vessel: &VesselParams,
    dof: Dof,
    omega: f64,
    u: f64,
    mu_h_deg: f64,
) -> Result<FrfPoint> {
    vessel.validate()?;
    let omega_e = encounter_frequency(omega, u, mu_h_deg)?;
    let we = clamped_omega_e(omega_e);
    let c = hull_coefficients(vessel, dof, omega, we, mu_h_deg)?;
    let elastic = c.stiffness - c.inertia * we * we;
    let resistive = c.damping * we;
    let magnitude = c.forcing / elastic.hypot(resistive);
    let phase = resistive.atan2(elastic);
    Ok(FrfPoint {
        omega,
        omega_e,
        magnitude,
        phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn usv() -> VesselParams {
        VesselParams::default()
    }

    #[test]
    fn encounter_frequency_examples() {
        assert!((encounter_frequency(1.0, 0.0, 137.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((encounter_frequency(1.0, 2.0, 90.0).unwrap() - 1.0).abs() < 1e-12);
        // Head seas at speed: k = 1/9.81, ω_e = 1 + 2k.
        let we = encounter_frequency(1.0, 2.0, 180.0).unwrap();
        assert!((we - 1.203874).abs() < 1e-6, "ω_e = {we}");
    }

    #[test]
    fn encounter_frequency_rejects_bad_inputs() {
        assert!(encounter_frequency(0.0, 1.0, 90.0).is_err());
        assert!(encounter_frequency(1.0, -1.0, 90.0).is_err());
        assert!(encounter_frequency(1.0, 1.0, -5.0).is_err());
        assert!(encounter_frequency(1.0, 1.0, 200.0).is_err());
    }

    #[test]
    fn vessel_params_validation() {
        assert!(VesselParams::new(2.05, 0.61, 0.16, 0.877, 0.731, 150.0, 0.264).is_ok());
        assert!(VesselParams::new(0.0, 0.61, 0.16, 0.877, 0.731, 150.0, 0.264).is_err());
        assert!(VesselParams::new(2.05, 0.61, 0.16, 1.2, 0.731, 150.0, 0.264).is_err());
        assert!(VesselParams::new(2.05, 0.61, 0.16, 0.877, 0.0, 150.0, 0.264).is_err());
        assert!(VesselParams::new(2.05, 0.61, 0.16, 0.877, 0.731, 150.0, -0.1).is_err());
    }

    #[test]
    fn heave_rides_long_waves() {
        let p = frf(&usv(), Dof::Heave, 0.05, 0.0, 180.0).unwrap();
        assert!(
            (p.magnitude - 1.0).abs() < 0.1,
            "heave at 0.05 rad/s = {}",
            p.magnitude
        );
    }

    #[test]
    fn heave_magnitude_decreases_toward_grid_edge() {
        let low = frf(&usv(), Dof::Heave, 0.3, 0.0, 180.0).unwrap().magnitude;
        let high = frf(&usv(), Dof::Heave, 2.0, 0.0, 180.0).unwrap().magnitude;
        assert!(high < low, "heave {high} at 2.0 vs {low} at 0.3");
    }

    #[test]
    fn beam_sea_frf_is_speed_independent() {
        for dof in Dof::ALL {
            for omega in [0.2, 0.7, 1.4, 2.0] {
                let still = frf(&usv(), dof, omega, 0.0, 90.0).unwrap();
                let moving = frf(&usv(), dof, omega, 5.0, 90.0).unwrap();
                assert!(
                    (still.magnitude - moving.magnitude).abs() < 1e-12
                        && (still.phase - moving.phase).abs() < 1e-12,
                    "{:?} at ω={omega} differs with speed",
                    dof
                );
            }
        }
    }

    #[test]
    fn zero_speed_reduces_to_wave_frequency() {
        for mu in [0.0, 45.0, 90.0, 135.0, 180.0] {
            let p = frf(&usv(), Dof::Heave, 1.3, 0.0, mu).unwrap();
            assert_eq!(p.omega_e, p.omega);
        }
    }

    #[test]
    fn pitch_vanishes_in_beam_seas() {
        let p = frf(&usv(), Dof::Pitch, 1.0, 3.0, 90.0).unwrap();
        assert!(p.magnitude.abs() < 1e-12, "beam-sea pitch = {}", p.magnitude);
    }

    #[test]
    fn pitch_long_wave_limit_is_wave_slope() {
        // For waves much longer than the hull, pitch amplitude approaches the
        // wave slope k·|cos μ| per unit amplitude.
        let omega = 0.2;
        let k = deep_water_wavenumber(omega);
        let head = frf(&usv(), Dof::Pitch, omega, 0.0, 180.0).unwrap();
        assert!(
            (head.magnitude - k).abs() / k < 0.05,
            "pitch {} vs slope {k}",
            head.magnitude
        );
        let oblique = frf(&usv(), Dof::Pitch, omega, 0.0, 120.0).unwrap();
        let slope = k * 120f64.to_radians().cos().abs();
        assert!((oblique.magnitude - slope).abs() / slope < 0.05);
    }

    #[test]
    fn roll_vanishes_in_head_and_following_seas() {
        for mu in [0.0, 180.0] {
            let p = frf(&usv(), Dof::Roll, 1.0, 2.0, mu).unwrap();
            assert!(p.magnitude.abs() < 1e-12);
        }
    }

    #[test]
    fn roll_long_wave_beam_limit_is_wave_slope() {
        let omega = 0.2;
        let k = deep_water_wavenumber(omega);
        let p = frf(&usv(), Dof::Roll, omega, 0.0, 90.0).unwrap();
        assert!(
            (p.magnitude - k).abs() / k < 0.05,
            "roll {} vs slope {k}",
            p.magnitude
        );
    }

    #[test]
    fn roll_resonance_peak_near_natural_period() {
        let geometry = roll_geometry(&usv()).unwrap();
        let omega_n = std::f64::consts::TAU / geometry.natural_period;
        // Scan beam-sea roll beyond the campaign grid to locate the peak.
        let mut best = (0.0f64, 0.0f64);
        let mut w = 0.5;
        while w < 8.0 {
            let m = frf(&usv(), Dof::Roll, w, 0.0, 90.0).unwrap().magnitude;
            if m > best.1 {
                best = (w, m);
            }
            w += 0.005;
        }
        assert!(
            (best.0 - omega_n).abs() / omega_n < 0.15,
            "peak at {} rad/s vs natural {omega_n}",
            best.0
        );
        // Peak location does not move with speed in beam seas.
        let mut best_fast = (0.0f64, 0.0f64);
        let mut w = 0.5;
        while w < 8.0 {
            let m = frf(&usv(), Dof::Roll, w, 5.0, 90.0).unwrap().magnitude;
            if m > best_fast.1 {
                best_fast = (w, m);
            }
            w += 0.005;
        }
        assert_eq!(best.0, best_fast.0);
    }

    #[test]
    fn two_prism_split_matches_hull_totals() {
        let v = usv();
        let g = roll_geometry(&v).unwrap();
        let wp = v.c_wp * v.length * v.breadth;
        let vol = v.c_b * v.length * v.breadth * v.draught;
        assert!((g.waterplane_area() - wp).abs() / wp < 1e-12);
        assert!((g.displaced_volume() - vol).abs() / vol < 1e-12);
        assert!(g.fore_length > 0.0 && g.aft_length > 0.0);
    }

    #[test]
    fn frf_is_finite_through_following_sea_degeneracy() {
        // ω_e crosses zero around u ≈ ω/(2k); sweep across it.
        let omega = 2.0;
        for i in 0..300 {
            let u = 4.5 + 0.003 * i as f64;
            for dof in Dof::ALL {
                let p = frf(&usv(), dof, omega, u, 0.0).unwrap();
                assert!(
                    p.magnitude.is_finite() && p.magnitude >= 0.0 && p.phase.is_finite(),
                    "{:?} degenerate at u={u}: {:?}",
                    dof,
                    p
                );
            }
        }
    }

    #[test]
    fn magnitudes_non_negative_across_grid() {
        for dof in Dof::ALL {
            for i in 0..100 {
                let omega = 0.05 + i as f64 * 0.02;
                for mu in [0.0, 30.0, 90.0, 150.0, 180.0] {
                    for u in [0.0, 2.5, 5.0] {
                        let p = frf(&usv(), dof, omega, u, mu).unwrap();
                        assert!(p.magnitude >= 0.0 && p.magnitude.is_finite());
                    }
                }
            }
        }
    }
}
