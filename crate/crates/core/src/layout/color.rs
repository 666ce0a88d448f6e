//! Diverging weight colormap (low weight blue, midpoint white, high red).

use std::fmt;
use std::str::FromStr;

use palette::{Clamp, FromColor, Lab, Mix, Srgb};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const WHITE: Rgb = Rgb([0xff, 0xff, 0xff]);

    fn to_lab(self) -> Lab {
        let [r, g, b] = self.0;
        Lab::from_color(Srgb::new(r, g, b).into_format::<f32>())
    }

    fn from_lab(lab: Lab) -> Rgb {
        let srgb: Srgb<u8> = Srgb::from_color(lab).clamp().into_format();
        Rgb([srgb.red, srgb.green, srgb.blue])
    }

    /// CIELAB coordinates, for checking the interpolation path.
    pub fn lab(self) -> [f32; 3] {
        let lab = self.to_lab();
        [lab.l, lab.a, lab.b]
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02x}{g:02x}{b:02x}")
    }
}

impl FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex =
            s.strip_prefix('#').filter(|h| h.len() == 6 && h.is_ascii()).ok_or_else(|| format!("bad color {s:?}"))?;
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| format!("bad color {s:?}"));
        Ok(Rgb([channel(0)?, channel(2)?, channel(4)?]))
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Endpoints of the diverging map and the weight range they span.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Colormap {
    pub low: Rgb,
    pub mid: Rgb,
    pub high: Rgb,
    pub domain: (u32, u32),
}

impl Default for Colormap {
    fn default() -> Self {
        Colormap { low: Rgb([0x21, 0x66, 0xac]), mid: Rgb::WHITE, high: Rgb([0xb2, 0x18, 0x2b]), domain: (0, 50) }
    }
}

impl Colormap {
    /// Color for a (possibly fractional) weight. Each half is a straight
    /// line in CIELAB; values outside the domain are clamped.
    pub fn color(&self, weight: f64) -> Rgb {
        let (lo, hi) = (self.domain.0 as f64, self.domain.1 as f64);
        let t = if hi > lo { ((weight - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
        let (from, to, s) = if t <= 0.5 { (self.low, self.mid, t * 2.0) } else { (self.mid, self.high, t * 2.0 - 1.0) };
        if s <= 0.0 {
            from
        } else if s >= 1.0 {
            to
        } else {
            Rgb::from_lab(from.to_lab().mix(to.to_lab(), s as f32))
        }
    }

    pub fn contains(&self, weight: u32) -> bool {
        (self.domain.0..=self.domain.1).contains(&weight)
    }
}
