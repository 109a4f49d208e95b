use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::kernel::Rng;

/// Circular cell with a guard zone around the base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    radius_m: f64,
    guard_m: f64,
    pathloss_exp: f64,
    shadow_std_db: f64,
}

impl Default for CellGeometry {
    /// 1000 m cell, 100 m guard range, path-loss exponent 3.8, 8 dB shadowing.
    fn default() -> Self {
        Self {
            radius_m: 1000.0,
            guard_m: 100.0,
            pathloss_exp: 3.8,
            shadow_std_db: 8.0,
        }
    }
}

impl CellGeometry {
    pub fn new(radius_m: f64, guard_m: f64, pathloss_exp: f64, shadow_std_db: f64) -> Result<Self> {
        ensure_positive("guard_m", guard_m)?;
        ensure_finite("radius_m", radius_m)?;
        if radius_m <= guard_m {
            return Err(invalid(
                "radius_m",
                format!("must exceed guard_m = {guard_m}, got {radius_m}"),
            ));
        }
        ensure_positive("pathloss_exp", pathloss_exp)?;
        ensure_finite("shadow_std_db", shadow_std_db)?;
        if shadow_std_db < 0.0 {
            return Err(invalid("shadow_std_db", "must be >= 0"));
        }
        Ok(Self {
            radius_m,
            guard_m,
            pathloss_exp,
            shadow_std_db,
        })
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }

    pub fn guard_m(&self) -> f64 {
        self.guard_m
    }

    pub fn pathloss_exp(&self) -> f64 {
        self.pathloss_exp
    }

    pub fn shadow_std_db(&self) -> f64 {
        self.shadow_std_db
    }

    /// `z / (distance / guard)^pathloss_exp`.
    pub fn large_scale(&self, distance_m: f64, shadow: f64) -> f64 {
        shadow / (distance_m / self.guard_m).powf(self.pathloss_exp)
    }
}

/// Per-user large-scale fading `β_k` together with the drop that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProfile {
    betas: Vec<f64>,
    distances: Vec<f64>,
    shadow_draws: Vec<f64>,
    geometry: CellGeometry,
}

impl FadingProfile {
    /// Profile with prescribed coefficients. Users are placed at the guard
    /// distance with shadowing `z_k = β_k`, which keeps the drop consistent
    /// with the default geometry. Zero coefficients are allowed here.
    pub fn from_betas(betas: &[f64]) -> Result<Self> {
        if betas.is_empty() {
            return Err(invalid("betas", "need at least one user"));
        }
        for &b in betas {
            ensure_finite("beta", b)?;
            if b < 0.0 {
                return Err(invalid("beta", format!("must be >= 0, got {b}")));
            }
        }
        let geometry = CellGeometry::default();
        Ok(Self {
            betas: betas.to_vec(),
            distances: vec![geometry.guard_m; betas.len()],
            shadow_draws: betas.to_vec(),
            geometry,
        })
    }

    /// Profile from explicit user distances and linear shadowing draws.
    pub fn from_positions(distances: &[f64], shadow_draws: &[f64], geometry: CellGeometry) -> Result<Self> {
        if distances.is_empty() || distances.len() != shadow_draws.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} distances, {} shadowing draws",
                distances.len(),
                shadow_draws.len()
            )));
        }
        for &d in distances {
            ensure_finite("distance_m", d)?;
            if d < geometry.guard_m || d > geometry.radius_m {
                return Err(invalid(
                    "distance_m",
                    format!("{d} outside [{}, {}]", geometry.guard_m, geometry.radius_m),
                ));
            }
        }
        for &z in shadow_draws {
            ensure_positive("z", z)?;
        }
        let betas = distances
            .iter()
            .zip(shadow_draws)
            .map(|(&d, &z)| geometry.large_scale(d, z))
            .collect();
        Ok(Self {
            betas,
            distances: distances.to_vec(),
            shadow_draws: shadow_draws.to_vec(),
            geometry,
        })
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn shadow_draws(&self) -> &[f64] {
        &self.shadow_draws
    }

    pub fn geometry(&self) -> &CellGeometry {
        &self.geometry
    }

    /// Same users, reordered so that user `j` of the result is user `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len()
            || perm
                .iter()
                .any(|&i| i >= self.len() || std::mem::replace(&mut seen[i], true))
        {
            return Err(invalid("perm", "not a permutation of the users"));
        }
        let pick = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Ok(Self {
            betas: pick(&self.betas),
            distances: pick(&self.distances),
            shadow_draws: pick(&self.shadow_draws),
            geometry: self.geometry,
        })
    }

    /// Writes the drop as text: a geometry comment line, a header, then one
    /// `distance_m,z,beta` row per user with round-trip float formatting.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let g = &self.geometry;
        writeln!(
            w,
            "# radius_m={} guard_m={} pathloss_exp={} shadow_std_db={}",
            g.radius_m, g.guard_m, g.pathloss_exp, g.shadow_std_db
        )?;
        writeln!(w, "distance_m,z,beta")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{:e},{:e},{:e}",
                self.distances[k], self.shadow_draws[k], self.betas[k]
            )?;
        }
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut geometry = CellGeometry::default();
        let mut header_seen = false;
        let (mut distances, mut shadows, mut betas) = (vec![], vec![], vec![]);
        for (idx, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let fmt_err = |reason: String| Error::ProfileFormat { line: lineno, reason };
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(comment) = text.strip_prefix('#') {
                if comment.contains('=') {
                    geometry = parse_geometry(comment).map_err(fmt_err)?;
                }
                continue;
            }
            if !header_seen {
                if text != "distance_m,z,beta" {
                    return Err(fmt_err(format!("expected header `distance_m,z,beta`, found `{text}`")));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = text.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(fmt_err(format!("expected 3 columns, found {}", fields.len())));
            }
            let mut vals = [0.0f64; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|_| fmt_err(format!("not a number: `{f}`")))?;
                if !v.is_finite() {
                    return Err(fmt_err(format!("non-finite value `{f}`")));
                }
            }
            let [d, z, b] = vals;
            if d < geometry.guard_m || d > geometry.radius_m || z <= 0.0 || b <= 0.0 {
                return Err(fmt_err("distance outside the cell or non-positive z/beta".into()));
            }
            let expected = geometry.large_scale(d, z);
            if (b - expected).abs() > 1e-9 * expected {
                return Err(fmt_err(format!("beta {b} inconsistent with z/(r/r0)^v = {expected}")));
            }
            distances.push(d);
            shadows.push(z);
            betas.push(b);
        }
        if betas.is_empty() {
            return Err(Error::ProfileFormat {
                line: 0,
                reason: "no users".into(),
            });
        }
        Ok(Self {
            betas,
            distances,
            shadow_draws: shadows,
            geometry,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}

fn parse_geometry(comment: &str) -> std::result::Result<CellGeometry, String> {
    let mut g = CellGeometry::default();
    for pair in comment.split_whitespace() {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("bad geometry field `{pair}`"))?;
        let v: f64 = value.parse().map_err(|_| format!("bad geometry value `{value}`"))?;
        match key {
            "radius_m" => g.radius_m = v,
            "guard_m" => g.guard_m = v,
            "pathloss_exp" => g.pathloss_exp = v,
            "shadow_std_db" => g.shadow_std_db = v,
            _ => return Err(format!("unknown geometry field `{key}`")),
        }
    }
    CellGeometry::new(g.radius_m, g.guard_m, g.pathloss_exp, g.shadow_std_db).map_err(|e| e.to_string())
}

/// Drops `k` users uniformly (by area) over the annulus between the guard
/// range and the cell edge, with log-normal shadowing.
pub fn drop_users(k: usize, geometry: &CellGeometry, rng: &mut Rng) -> Result<FadingProfile> {
    if k == 0 {
        return Err(invalid("K", "must be >= 1"));
    }
    let (r0, r) = (geometry.guard_m, geometry.radius_m);
    let mut distances = Vec::with_capacity(k);
    let mut shadows = Vec::with_capacity(k);
    for _ in 0..k {
        let u = rng.uniform();
        let d = (r0 * r0 + u * (r * r - r0 * r0)).sqrt().clamp(r0, r);
        let z_db = geometry.shadow_std_db * rng.normal();
        distances.push(d);
        shadows.push(10f64.powf(z_db / 10.0));
    }
    FadingProfile::from_positions(&distances, &shadows, *geometry)
}
