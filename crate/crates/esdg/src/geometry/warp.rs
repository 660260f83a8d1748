//! Built-in curvilinear warps. Each maps nodal positions pointwise; all of
//! them vanish on the boundary of their intended domain so periodic pairings
//! survive warping.

use crate::{Error, Point, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warp {
    None,
    /// Sine warp for the [0,20] x [-5,5] channel domain.
    Channel2d,
    /// 2D cosine bump on [-1,1]^2: x + a cos(pi x1/2) cos(pi x2/2) (1,1).
    Cos2d { amplitude: f64 },
    /// Two-component sine warp on the unit square [0,1]^2; vanishes on the
    /// domain boundary.
    Wavy2d { amplitude: f64 },
    /// 3D cosine bump on [-1,1]^3: x + a cos(pi x1/2)cos(pi x2/2)cos(pi x3/2) (1,1,1).
    Cos3d { amplitude: f64 },
    /// Cosine warp with a different bump per coordinate. Unlike `Cos3d`
    /// (whose displacement is one scalar field times a fixed direction, a
    /// rank-one Jacobian perturbation with polynomial cofactors), this one
    /// genuinely breaks the discrete GCL for raw cross-product metrics.
    Cos3dAniso { amplitude: f64 },
    /// Sine warp for the [0,10] x [0,20] x [0,10] box domain.
    Box3d,
    /// x + a sin(x1) sin(x2) sin(x3) (1,1,1) on [-pi,pi]^3.
    SinSin3d { amplitude: f64 },
}

impl Warp {
    pub fn apply(&self, p: Point) -> Point {
        let [x, y, z] = p;
        match *self {
            Warp::None => p,
            Warp::Channel2d => [
                x + (PI * x / 20.0).sin() * (2.0 * PI * (y + 5.0) / 10.0).sin(),
                y - 0.5 * (2.0 * PI * x / 20.0).sin() * (PI * (y + 5.0) / 10.0).sin(),
                z,
            ],
            Warp::Cos2d { amplitude } => {
                let b = amplitude * (PI * x / 2.0).cos() * (PI * y / 2.0).cos();
                [x + b, y + b, z]
            }
            Warp::Wavy2d { amplitude } => [
                x + amplitude * (PI * x).sin() * (2.0 * PI * y).sin(),
                y - 0.5 * amplitude * (2.0 * PI * x).sin() * (PI * y).sin(),
                z,
            ],
            Warp::Cos3d { amplitude } => {
                let b = amplitude
                    * (PI * x / 2.0).cos()
                    * (PI * y / 2.0).cos()
                    * (PI * z / 2.0).cos();
                [x + b, y + b, z + b]
            }
            Warp::Cos3dAniso { amplitude } => {
                let (cx, cy, cz) = ((PI * x / 2.0).cos(), (PI * y / 2.0).cos(), (PI * z / 2.0).cos());
                let (cx3, cz3) = ((3.0 * PI * x / 2.0).cos(), (3.0 * PI * z / 2.0).cos());
                [
                    x + amplitude * cx * cy * cz,
                    y - 0.6 * amplitude * cx * cy * cz3,
                    z + 0.8 * amplitude * cx3 * cy * cz,
                ]
            }
            Warp::Box3d => [
                x + 0.5
                    * (PI * x / 10.0).sin()
                    * (2.0 * PI * y / 20.0).sin()
                    * (PI * z / 10.0).sin(),
                y - (2.0 * PI * x / 10.0).sin() * (PI * y / 10.0).sin() * (2.0 * PI * z / 10.0).sin(),
                z + 0.5
                    * (PI * x / 10.0).sin()
                    * (2.0 * PI * y / 10.0).sin()
                    * (PI * z / 10.0).sin(),
            ],
            Warp::SinSin3d { amplitude } => {
                let b = amplitude * x.sin() * y.sin() * z.sin();
                [x + b, y + b, z + b]
            }
        }
    }

    /// Parse a warp name, e.g. "none", "channel2d", "cos3d", "cos3d:0.125",
    /// "sinsin3d:0.125".
    pub fn parse(name: &str) -> Result<Warp> {
        let (kind, amp) = match name.split_once(':') {
            Some((k, a)) => {
                let v: f64 = a
                    .parse()
                    .map_err(|_| Error::Config(format!("bad warp amplitude in '{name}'")))?;
                (k, Some(v))
            }
            None => (name, None),
        };
        Ok(match kind {
            "none" => Warp::None,
            "channel2d" => Warp::Channel2d,
            "cos2d" => Warp::Cos2d {
                amplitude: amp.unwrap_or(0.125),
            },
            "wavy2d" => Warp::Wavy2d {
                amplitude: amp.unwrap_or(0.1),
            },
            "cos3d" => Warp::Cos3d {
                amplitude: amp.unwrap_or(0.125),
            },
            "cos3d_aniso" => Warp::Cos3dAniso {
                amplitude: amp.unwrap_or(0.125),
            },
            "box3d" => Warp::Box3d,
            "sinsin3d" => Warp::SinSin3d {
                amplitude: amp.unwrap_or(0.125),
            },
            _ => return Err(Error::Config(format!("unknown warp '{name}'"))),
        })
    }

    pub fn name(&self) -> String {
        match *self {
            Warp::None => "none".into(),
            Warp::Channel2d => "channel2d".into(),
            Warp::Cos2d { amplitude } => format!("cos2d:{amplitude}"),
            Warp::Wavy2d { amplitude } => format!("wavy2d:{amplitude}"),
            Warp::Cos3d { amplitude } => format!("cos3d:{amplitude}"),
            Warp::Cos3dAniso { amplitude } => format!("cos3d_aniso:{amplitude}"),
            Warp::Box3d => "box3d".into(),
            Warp::SinSin3d { amplitude } => format!("sinsin3d:{amplitude}"),
        }
    }
}
