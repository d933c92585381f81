//! Experiment configuration (TOML), bit-exact binary snapshots, and CSV
//! emission.
//!
//! Snapshot layout: 8-byte magic `MKGSNAP1`, a little-endian `u64` manifest
//! length, a JSON manifest (format version, lattice spec, time, beta, floor,
//! field table with byte offsets and SHA-256 checksums), then the raw field
//! blobs as little-endian `f64`, row-major, axis order (x, y, z), two time
//! levels per field.

use crate::boost::ExternalUniform;
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::lattice::{Boundary, LatticeSpec, LatticeState};
use crate::observables::DiagnosticsRow;
use crate::particle::TrajectoryRow;
use crate::potentials::PotentialSpec;
use crate::{Cplx, Real};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"MKGSNAP1";
pub const SNAPSHOT_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    pub beta: Real,
    #[serde(default)]
    pub radial: RadialConfig,
    #[serde(default)]
    pub lattice: Option<LatticeConfig>,
    #[serde(default)]
    pub placements: Vec<PlacementConfig>,
    #[serde(default)]
    pub external: Option<ExternalConfig>,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    pub r_max: Real,
    pub n: usize,
    pub omega_scan: Vec<Real>,
    #[serde(default = "default_bracket")]
    pub bracket: [Real; 2],
    #[serde(default)]
    pub refine_iters: usize,
}

fn default_bracket() -> [Real; 2] {
    [1e-3, 4.0]
}

impl Default for RadialConfig {
    fn default() -> Self {
        RadialConfig {
            r_max: 45.0,
            n: 1537,
            omega_scan: vec![0.80, 0.84, 0.88, 0.92],
            bracket: default_bracket(),
            refine_iters: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dim: usize,
    pub cells: usize,
    pub extent: Real,
    #[serde(default = "default_dt_factor")]
    pub dt_factor: Real,
    pub boundary: Boundary,
}

fn default_dt_factor() -> Real {
    0.9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    pub center: [Real; 3],
    #[serde(default)]
    pub v: [Real; 3],
    #[serde(default = "default_sign")]
    pub sign: i8,
    #[serde(default)]
    pub phase: Real,
}

fn default_sign() -> i8 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    #[serde(default)]
    pub e: [Real; 3],
    #[serde(default)]
    pub h: [Real; 3],
    #[serde(default)]
    pub t_on: Real,
    /// Capacitor geometry of the `compare` experiment.
    #[serde(default)]
    pub qer0_over_m: Real,
    #[serde(default)]
    pub field_halfwidth: Real,
    #[serde(default)]
    pub downramp: Real,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_every")]
    pub every: usize,
    #[serde(default = "default_out")]
    pub out_dir: String,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub threads: usize,
}

fn default_steps() -> usize {
    2000
}
fn default_every() -> usize {
    50
}
fn default_out() -> String {
    "out".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_steps: default_steps(),
            every: default_every(),
            out_dir: default_out(),
            deterministic: false,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    /// Collects every violation rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(Error::Config(mut e)) = self.potential.validate() {
            errs.append(&mut e);
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            errs.push(format!("beta = {} must be finite and >= 0", self.beta));
        }
        if !(self.radial.r_max > 0.0) {
            errs.push(format!("radial.r_max = {} must be > 0", self.radial.r_max));
        }
        if self.radial.n < 256 {
            errs.push(format!("radial.n = {} below the 256-node minimum", self.radial.n));
        }
        if self.radial.omega_scan.is_empty() {
            errs.push("radial.omega_scan is empty".into());
        }
        for &w in &self.radial.omega_scan {
            if !(w > 0.0 && w < 1.0) {
                errs.push(format!(
                    "radial.omega_scan value {w} outside (0, 1): stationary solutions exist only \
                     for omega in the open interval (omega_inf, 1)"
                ));
            }
        }
        if !(self.radial.bracket[0] > 0.0 && self.radial.bracket[0] < self.radial.bracket[1]) {
            errs.push(format!("radial.bracket {:?} must satisfy 0 < lo < hi", self.radial.bracket));
        }
        if let Some(l) = &self.lattice {
            if !(1..=3).contains(&l.dim) {
                errs.push(format!("lattice.dim = {} not in 1..=3", l.dim));
            }
            if l.cells < 32 {
                errs.push(format!("lattice.cells = {} below 32 per axis", l.cells));
            }
            if !(l.extent > 0.0) {
                errs.push(format!("lattice.extent = {} must be > 0", l.extent));
            }
            if !(l.dt_factor > 0.0 && l.dt_factor <= 1.0) {
                errs.push(format!(
                    "lattice.dt_factor = {} outside (0, 1]: dt = factor * 0.5 h / sqrt(dim) is the CFL bound",
                    l.dt_factor
                ));
            }
        }
        for (i, p) in self.placements.iter().enumerate() {
            let v2: Real = p.v.iter().map(|x| x * x).sum();
            if v2 >= 1.0 {
                errs.push(format!(
                    "placements[{i}].v = {:?} has |v| >= 1, violating the boost-parameter precondition |v| < 1",
                    p.v
                ));
            }
            if p.sign != 1 && p.sign != -1 {
                errs.push(format!("placements[{i}].sign = {} must be +1 or -1", p.sign));
            }
        }
        if self.run.n_steps == 0 {
            errs.push("run.n_steps must be >= 1".into());
        }
        if self.run.every == 0 {
            errs.push("run.every must be >= 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn lattice_spec(&self) -> Result<Option<LatticeSpec>> {
        match &self.lattice {
            None => Ok(None),
            Some(l) => {
                let spec =
                    LatticeSpec::new(l.dim, l.cells, l.extent, l.dt_factor, l.boundary)?;
                Ok(Some(spec))
            }
        }
    }

    pub fn external_uniform(&self) -> Option<ExternalUniform> {
        self.external.as_ref().and_then(|e| {
            if e.e.iter().all(|x| *x == 0.0) && e.h.iter().all(|x| *x == 0.0) {
                None
            } else {
                Some(ExternalUniform { e: e.e, h: e.h })
            }
        })
    }
}

/// Loads and fully validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    let cfg: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    cfg.validate()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// snapshots
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct FieldEntry {
    name: String,
    offset: u64,
    len: u64,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    lattice: LatticeSpec,
    t: Real,
    beta: Real,
    u_floor: Real,
    ext_t_on: Option<Real>,
    fields: Vec<FieldEntry>,
}

fn to_bytes(v: &[Real]) -> Vec<u8> {
    let mut out = Vec::with_capacity(v.len() * 8);
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn from_bytes(b: &[u8]) -> Vec<Real> {
    b.chunks_exact(8).map(|c| Real::from_le_bytes(c.try_into().unwrap())).collect()
}

fn split_complex(v: &[Cplx]) -> (Vec<Real>, Vec<Real>) {
    (v.iter().map(|c| c.re).collect(), v.iter().map(|c| c.im).collect())
}

fn field_list(state: &LatticeState) -> Vec<(String, Vec<Real>)> {
    let mut fields = Vec::new();
    let (re, im) = split_complex(&state.psi);
    fields.push(("psi_re".to_string(), re));
    fields.push(("psi_im".to_string(), im));
    let (re, im) = split_complex(&state.psi_prev);
    fields.push(("psi_re_prev".to_string(), re));
    fields.push(("psi_im_prev".to_string(), im));
    fields.push(("phi".to_string(), state.phi.clone()));
    fields.push(("phi_prev".to_string(), state.phi_prev.clone()));
    for ax in 0..state.spec.dim {
        fields.push((format!("a{ax}"), state.a[ax].clone()));
        fields.push((format!("a{ax}_prev"), state.a_prev[ax].clone()));
    }
    if let Some(pe) = &state.phi_ext {
        fields.push(("phi_ext".to_string(), pe.clone()));
    }
    if let Some(ae) = &state.a_ext {
        for (ax, comp) in ae.iter().enumerate() {
            fields.push((format!("a{ax}_ext"), comp.clone()));
        }
    }
    fields
}

pub fn write_snapshot(state: &LatticeState, path: &Path) -> Result<()> {
    let fields = field_list(state);
    let mut entries = Vec::new();
    let mut offset = 0u64;
    let mut blob = Vec::new();
    for (name, data) in &fields {
        let bytes = to_bytes(data);
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        entries.push(FieldEntry {
            name: name.clone(),
            offset,
            len: bytes.len() as u64,
            sha256: format!("{:x}", hasher.finalize()),
        });
        offset += bytes.len() as u64;
        blob.extend_from_slice(&bytes);
    }
    let manifest = Manifest {
        format_version: SNAPSHOT_VERSION,
        lattice: state.spec.clone(),
        t: state.t,
        beta: state.beta,
        u_floor: state.u_floor,
        ext_t_on: state.ext_t_on,
        fields: entries,
    };
    let mjson = serde_json::to_vec(&manifest).map_err(|e| Error::Snapshot(e.to_string()))?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(SNAPSHOT_MAGIC)?;
    f.write_all(&(mjson.len() as u64).to_le_bytes())?;
    f.write_all(&mjson)?;
    f.write_all(&blob)?;
    f.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<LatticeState> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let mut lenb = [0u8; 8];
    f.read_exact(&mut lenb)?;
    let mlen = u64::from_le_bytes(lenb) as usize;
    let mut mjson = vec![0u8; mlen];
    f.read_exact(&mut mjson)?;
    let manifest: Manifest =
        serde_json::from_slice(&mjson).map_err(|e| Error::Snapshot(e.to_string()))?;
    if manifest.format_version != SNAPSHOT_VERSION {
        return Err(Error::SnapshotVersion {
            found: manifest.format_version,
            expected: SNAPSHOT_VERSION,
        });
    }
    manifest.lattice.validate()?;
    let mut blob = Vec::new();
    f.read_to_end(&mut blob)?;

    let take = |name: &str| -> Result<Vec<Real>> {
        let e = manifest
            .fields
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::Snapshot(format!("missing field `{name}`")))?;
        let lo = e.offset as usize;
        let hi = lo + e.len as usize;
        if hi > blob.len() {
            return Err(Error::Snapshot(format!("truncated blob for field `{name}`")));
        }
        let bytes = &blob[lo..hi];
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        if format!("{:x}", hasher.finalize()) != e.sha256 {
            return Err(Error::SnapshotChecksum(name.to_string()));
        }
        Ok(from_bytes(bytes))
    };

    let n = manifest.lattice.len();
    let dim = manifest.lattice.dim;
    let merge = |re: Vec<Real>, im: Vec<Real>| -> Vec<Cplx> {
        re.into_iter().zip(im).map(|(r, i)| Cplx::new(r, i)).collect()
    };
    let psi = merge(take("psi_re")?, take("psi_im")?);
    let psi_prev = merge(take("psi_re_prev")?, take("psi_im_prev")?);
    let phi = take("phi")?;
    let phi_prev = take("phi_prev")?;
    if psi.len() != n || phi.len() != n {
        return Err(Error::Snapshot("field length does not match the lattice".into()));
    }
    let mut a = Vec::new();
    let mut a_prev = Vec::new();
    for ax in 0..dim {
        a.push(take(&format!("a{ax}"))?);
        a_prev.push(take(&format!("a{ax}_prev"))?);
    }
    let phi_ext = take("phi_ext").ok();
    let a_ext = {
        let mut comps = Vec::new();
        for ax in 0..dim {
            match take(&format!("a{ax}_ext")) {
                Ok(c) => comps.push(c),
                Err(Error::Snapshot(_)) => break,
                Err(e) => return Err(e),
            }
        }
        if comps.len() == dim {
            Some(comps)
        } else {
            None
        }
    };
    Ok(LatticeState {
        spec: manifest.lattice,
        psi,
        psi_prev,
        phi,
        phi_prev,
        a,
        a_prev,
        phi_ext,
        a_ext,
        ext_t_on: manifest.ext_t_on,
        t: manifest.t,
        beta: manifest.beta,
        u_floor: manifest.u_floor,
    })
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

fn fmt(x: Real) -> String {
    format!("{x:.17e}")
}

/// Diagnostics CSV with the fixed column order.
pub fn write_diagnostics_csv(rows: &[DiagnosticsRow], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "t,E_m,E_i,E_f,E_total,Q,H_hyl,P1,P2,P3,centroid_x,centroid_y,centroid_z,lorenz_residual,max_psi"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt(r.t),
            fmt(r.e_m),
            fmt(r.e_i),
            fmt(r.e_f),
            fmt(r.e_total),
            fmt(r.q),
            fmt(r.h_hyl),
            fmt(r.p[0]),
            fmt(r.p[1]),
            fmt(r.p[2]),
            fmt(r.centroid[0]),
            fmt(r.centroid[1]),
            fmt(r.centroid[2]),
            fmt(r.lorenz_residual),
            fmt(r.max_psi)
        )?;
    }
    f.flush()?;
    Ok(())
}

/// Radial profile CSV `(r, u, phi)`.
pub fn write_profile_csv(profile: &crate::radial::RadialProfile, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "r,u,phi")?;
    for i in 0..profile.grid.n {
        writeln!(f, "{},{},{}", fmt(profile.grid.r(i)), fmt(profile.u[i]), fmt(profile.phi[i]))?;
    }
    f.flush()?;
    Ok(())
}

/// Particle trajectory CSV `(t, xi, v, gamma)`.
pub fn write_trajectory_csv(rows: &[TrajectoryRow], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,xi1,xi2,xi3,v1,v2,v3,gamma")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            fmt(r.t),
            fmt(r.xi[0]),
            fmt(r.xi[1]),
            fmt(r.xi[2]),
            fmt(r.v[0]),
            fmt(r.v[1]),
            fmt(r.v[2]),
            fmt(r.gamma)
        )?;
    }
    f.flush()?;
    Ok(())
}

/// Tracked soliton trajectory CSV (centroid + centered-difference velocity).
pub fn write_tracked_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,xi1,xi2,xi3,v1,v2,v3")?;
    let vels = traj.velocities();
    for (i, &t) in traj.t.iter().enumerate() {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            fmt(t),
            fmt(traj.xi[i][0]),
            fmt(traj.xi[i][1]),
            fmt(traj.xi[i][2]),
            fmt(vels[i][0]),
            fmt(vels[i][1]),
            fmt(vels[i][2])
        )?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_minimal_and_violations() {
        let toml_ok = r#"
            beta = 1e-2
            [potential]
            variant = "bell"
            eps = 0.1
        "#;
        let cfg: ExperimentConfig = toml::from_str(toml_ok).unwrap();
        assert!(cfg.validate().is_ok());

        let toml_bad = r#"
            beta = -1.0
            [potential]
            variant = "power"
            p = 7.0
            [radial]
            r_max = 40.0
            n = 100
            omega_scan = [1.2, 0.5]
            [[placements]]
            center = [0.0, 0.0, 0.0]
            v = [1.0, 0.0, 0.0]
        "#;
        let cfg: ExperimentConfig = toml::from_str(toml_bad).unwrap();
        match cfg.validate() {
            Err(Error::Config(errs)) => {
                assert!(errs.len() >= 4, "expected all violations listed, got {errs:?}");
                assert!(errs.iter().any(|e| e.contains("omega_inf")));
                assert!(errs.iter().any(|e| e.contains("|v| >= 1") || e.contains("|v| >=")));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
