//! JSON surface specifications and the surfaces they resolve to.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use helfrich_core::body::Body;
use helfrich_core::constructions::{
    bridged_double_sphere, bridged_immersed_sphere, catenoid_piece, cut_sphere, dumbbell, ellipsoid, handled_sphere,
    nodoid_piece, pancake_sphere, snake_a_for_side, snake_surface, sphere, spherical_cap, torus,
};
use helfrich_core::mesh::TriMesh;
use helfrich_core::mesh_io::{parse_mesh, MeshFormat};
use helfrich_core::minimize::DiscreteProfile;
use helfrich_core::nodoid::NodoidParams;
use helfrich_core::surface::CompositeSurface;
use helfrich_core::Vec3;

/// A surface named by constructor and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Meridian nodes (ρ, z) of a `profile` spec.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<[f64; 2]>>,
}

pub const KINDS: &[&str] = &[
    "sphere",
    "ellipsoid",
    "torus",
    "catenoid_piece",
    "spherical_cap",
    "cut_sphere",
    "dumbbell",
    "nodoid",
    "handled_sphere",
    "snake",
    "bridged_double_sphere",
    "bridged_immersed_sphere",
    "pancake_sphere",
    "profile",
    "mesh_file",
];

/// Parameter names with defaults (`None` means required).
fn schema(kind: &str) -> Option<&'static [(&'static str, Option<f64>)]> {
    Some(match kind {
        "sphere" => &[("r", Some(1.0)), ("cx", Some(0.0)), ("cy", Some(0.0)), ("cz", Some(0.0))],
        "ellipsoid" => &[("a", None), ("c", None)],
        "torus" => &[("R", None), ("r", None)],
        "catenoid_piece" | "cut_sphere" | "dumbbell" => &[("a", None), ("t", None)],
        "spherical_cap" => &[("r", None), ("theta0", None)],
        "nodoid" => &[("a", None), ("b", None)],
        "handled_sphere" => &[("a", None)],
        "snake" => &[("a", Some(f64::NAN)), ("n", Some(f64::NAN))],
        "bridged_double_sphere" | "bridged_immersed_sphere" => &[("c0", Some(f64::NAN)), ("b", None)],
        "pancake_sphere" => &[("h", None)],
        "profile" | "mesh_file" => &[],
        _ => return None,
    })
}

/// What a spec resolves to.
pub enum Built {
    Composite {
        surface: CompositeSurface,
        info: Value,
    },
    Mesh(TriMesh),
    Profile(DiscreteProfile),
}

impl SurfaceSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing surface spec {}", path.display()))
    }

    pub fn profile(p: &DiscreteProfile) -> Self {
        Self {
            kind: "profile".into(),
            params: BTreeMap::new(),
            path: None,
            nodes: Some(p.nodes.clone()),
        }
    }

    /// Fills defaults, rejects unknown or missing parameters and substitutes
    /// `c0` where a construction depends on it.
    pub fn resolve(&self, c0: f64) -> Result<Self> {
        let schema = schema(&self.kind).ok_or_else(|| anyhow!("unknown kind '{}' (one of {})", self.kind, KINDS.join(", ")))?;
        for k in self.params.keys() {
            if !schema.iter().any(|(n, _)| n == k) {
                bail!("kind '{}' has no parameter '{k}'", self.kind);
            }
        }
        let mut params = BTreeMap::new();
        for (name, default) in schema {
            match (self.params.get(*name), default) {
                (Some(v), _) => {
                    params.insert(name.to_string(), *v);
                }
                (None, Some(d)) if !d.is_nan() => {
                    params.insert(name.to_string(), *d);
                }
                (None, Some(_)) => {}
                (None, None) => bail!("kind '{}' needs parameter '{name}'", self.kind),
            }
        }
        if self.kind.starts_with("bridged") && !params.contains_key("c0") {
            params.insert("c0".into(), c0);
        }
        if self.kind == "snake" && params.contains_key("a") == params.contains_key("n") {
            bail!("snake needs exactly one of 'a' or 'n'");
        }
        match self.kind.as_str() {
            "mesh_file" if self.path.is_none() => bail!("mesh_file needs 'path'"),
            "profile" if self.nodes.is_none() => bail!("profile needs 'nodes'"),
            _ => {}
        }
        Ok(Self {
            kind: self.kind.clone(),
            params,
            path: self.path.clone(),
            nodes: self.nodes.clone(),
        })
    }

    fn p(&self, name: &str) -> f64 {
        self.params[name]
    }

    /// Builds a resolved spec.
    pub fn build(&self) -> Result<Built> {
        let single = |piece| Built::Composite {
            surface: CompositeSurface::single(piece),
            info: json!({}),
        };
        let comp = |surface| Built::Composite {
            surface,
            info: json!({}),
        };
        Ok(match self.kind.as_str() {
            "sphere" => single(sphere(self.p("r"), Vec3::new(self.p("cx"), self.p("cy"), self.p("cz")))?),
            "ellipsoid" => single(ellipsoid(self.p("a"), self.p("c"))?),
            "torus" => comp(torus(self.p("R"), self.p("r"))?),
            "catenoid_piece" => single(catenoid_piece(self.p("a"), self.p("t"))?),
            "spherical_cap" => single(spherical_cap(self.p("r"), self.p("theta0"))?),
            "cut_sphere" => {
                let c = cut_sphere(self.p("a"), self.p("t"))?;
                Built::Composite {
                    surface: CompositeSurface::single(c.piece),
                    info: json!({"r": c.r, "h": c.h, "rho": c.rho, "center_height": c.p}),
                }
            }
            "dumbbell" => comp(dumbbell(self.p("a"), self.p("t"))?),
            "nodoid" => {
                let np = NodoidParams::new(self.p("a"), self.p("b"))?;
                Built::Composite {
                    surface: CompositeSurface::single(nodoid_piece(np)?),
                    info: json!({"c": np.c, "t_max": np.t_max}),
                }
            }
            "handled_sphere" => {
                let h = handled_sphere(self.p("a"))?;
                Built::Composite {
                    info: json!({"n_bumps": h.n_bumps, "t_a": h.t_a, "s_a": h.s_a}),
                    surface: h.surface,
                }
            }
            "snake" => {
                let a = match self.params.get("n") {
                    Some(n) if *n >= 2.0 && n.fract() == 0.0 => snake_a_for_side(*n as usize)?,
                    Some(n) => bail!("snake side n must be an integer ≥ 2 (got {n})"),
                    None => self.p("a"),
                };
                let s = snake_surface(a)?;
                Built::Composite {
                    info: serde_json::to_value(&s.info)?,
                    surface: s.surface,
                }
            }
            "bridged_double_sphere" | "bridged_immersed_sphere" => {
                let f = if self.kind == "bridged_double_sphere" {
                    bridged_double_sphere
                } else {
                    bridged_immersed_sphere
                };
                let s = f(self.p("c0"), self.p("b"))?;
                Built::Composite {
                    info: serde_json::to_value(&s.info)?,
                    surface: s.surface,
                }
            }
            "pancake_sphere" => comp(pancake_sphere(self.p("h"))?),
            "profile" => Built::Profile(DiscreteProfile::new(self.nodes.clone().unwrap_or_default())?),
            "mesh_file" => {
                let path = self.path.as_ref().ok_or_else(|| anyhow!("mesh_file needs 'path'"))?;
                let fmt = MeshFormat::from_path(&path.to_string_lossy())
                    .ok_or_else(|| anyhow!("mesh files must end in .off or .obj"))?;
                let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                Built::Mesh(parse_mesh(&bytes, fmt)?)
            }
            other => bail!("unknown kind '{other}'"),
        })
    }

    /// The enclosed solid: exact balls for spheres, solids of revolution for
    /// coaxial composites, winding-number solids for meshes and profiles.
    pub fn body(&self, n_azimuth: usize) -> Result<Body> {
        if self.kind == "sphere" {
            return Ok(Body::ball(Vec3::new(self.p("cx"), self.p("cy"), self.p("cz")), self.p("r"))?);
        }
        Ok(match self.build()? {
            Built::Composite { surface, .. } => Body::from_composite(&surface)?,
            Built::Mesh(m) => Body::from_mesh(&m)?,
            Built::Profile(p) => Body::from_mesh(&p.to_mesh(n_azimuth)?)?,
        })
    }
}
