//! The declarative family table: glyphs, leg colours, dimensions, arity
//! minima and slot symmetry.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::OperadError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    AssInf,
    MorAssInf,
    LieInf(u32),
    Ocha(u32),
    MorLieInf,
    MorOcha,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::AssInf => write!(f, "ass"),
            Family::MorAssInf => write!(f, "morass"),
            Family::LieInf(d) => write!(f, "lie(d={d})"),
            Family::Ocha(d) => write!(f, "ocha(d={d})"),
            Family::MorLieInf => write!(f, "morlie"),
            Family::MorOcha => write!(f, "morocha"),
        }
    }
}

impl Family {
    /// Parses `ass`, `morass`, `lie`, `ocha`, `morlie`, `morocha`; `d` only
    /// matters for `lie` and `ocha`.
    pub fn from_name(name: &str, d: u32) -> Option<Family> {
        Some(match name.to_ascii_lowercase().as_str() {
            "ass" | "assinf" => Family::AssInf,
            "morass" | "morassinf" => Family::MorAssInf,
            "lie" | "lieinf" => Family::LieInf(d),
            "ocha" => Family::Ocha(d),
            "morlie" | "morlieinf" => Family::MorLieInf,
            "morocha" => Family::MorOcha,
            _ => return None,
        })
    }

    pub fn glyphs(self) -> &'static [Glyph] {
        use Glyph::*;
        match self {
            Family::AssInf => &[Ass],
            Family::MorAssInf => &[AWhite, ABlack, ADashed],
            Family::LieInf(_) => &[Lie],
            Family::Ocha(_) => &[Lie, Tri],
            Family::MorLieInf => &[LWhite, LBlack, LBroken],
            Family::MorOcha => &[InWhite, InTri, Black, Diamond, OutWhite, OutTri],
        }
    }

    pub fn dimension(self) -> u32 {
        match self {
            Family::LieInf(d) | Family::Ocha(d) => d,
            _ => 2,
        }
    }

    /// Families whose printed degree is cohomological (minus the face
    /// dimension) rather than the dimension itself.
    pub fn cohomological(self) -> bool {
        matches!(
            self,
            Family::LieInf(_) | Family::Ocha(_) | Family::MorLieInf
        )
    }

    pub fn aerial_leaf_colour(self) -> Colour {
        match self {
            Family::LieInf(_) | Family::Ocha(_) => Colour::Closed,
            Family::MorLieInf => Colour::In,
            Family::MorOcha => Colour::InClosed,
            Family::AssInf | Family::MorAssInf => Colour::None,
        }
    }

    pub fn ground_leaf_colour(self) -> Colour {
        match self {
            Family::AssInf => Colour::Ass,
            Family::MorAssInf => Colour::In,
            Family::Ocha(_) => Colour::Open,
            Family::MorOcha => Colour::InOpen,
            Family::LieInf(_) | Family::MorLieInf => Colour::None,
        }
    }
}

/// Corolla shapes. `A*` glyphs belong to Mor(A∞), `L*` to Mor(L∞); the
/// remaining Mor(OCHA) glyphs are `In*`, `Black`, `Diamond`, `Out*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Glyph {
    Ass,
    AWhite,
    ABlack,
    ADashed,
    Lie,
    Tri,
    LWhite,
    LBlack,
    LBroken,
    InWhite,
    InTri,
    Black,
    Diamond,
    OutWhite,
    OutTri,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Colour {
    None,
    Ass,
    In,
    Out,
    Closed,
    Open,
    InClosed,
    InOpen,
    OutClosed,
    OutOpen,
}

/// A generator: `n` counts the main inputs (symmetric for sym glyphs, planar
/// for the A∞ glyphs), `m` the planar ground inputs of ▼/◆ glyphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Corolla {
    pub glyph: Glyph,
    pub n: u32,
    pub m: u32,
}

impl Corolla {
    pub fn new(glyph: Glyph, n: u32, m: u32) -> Self {
        Corolla { glyph, n, m }
    }

    pub fn planar_only(self) -> bool {
        matches!(
            self.glyph,
            Glyph::Ass | Glyph::AWhite | Glyph::ABlack | Glyph::ADashed
        )
    }

    pub fn sym_arity(self) -> usize {
        if self.planar_only() {
            0
        } else {
            self.n as usize
        }
    }

    pub fn planar_arity(self) -> usize {
        if self.planar_only() {
            self.n as usize
        } else {
            self.m as usize
        }
    }

    /// Output, symmetric-slot and planar-slot colours.
    pub fn colours(self) -> (Colour, Colour, Colour) {
        use Colour::*;
        use Glyph::*;
        match self.glyph {
            Glyph::Ass => (Colour::Ass, None, Colour::Ass),
            AWhite => (In, None, In),
            ABlack => (Out, None, In),
            ADashed => (Out, None, Out),
            Lie => (Closed, Closed, None),
            Tri => (Open, Closed, Open),
            LWhite => (In, In, None),
            LBlack => (Out, In, None),
            LBroken => (Out, Out, None),
            InWhite => (InClosed, InClosed, None),
            InTri => (InOpen, InClosed, InOpen),
            Black => (OutClosed, InClosed, None),
            Diamond => (OutOpen, InClosed, InOpen),
            OutWhite => (OutClosed, OutClosed, None),
            OutTri => (OutOpen, OutClosed, OutOpen),
        }
    }

    pub fn output_colour(self) -> Colour {
        self.colours().0
    }

    /// Dimension of the corresponding face; Koszul signs use its parity.
    pub fn dim(self, family: Family) -> i64 {
        use Glyph::*;
        let (n, m) = (self.n as i64, self.m as i64);
        let d = family.dimension() as i64;
        match self.glyph {
            Ass | AWhite | ADashed => n - 2,
            ABlack => n - 1,
            Lie => d * n - d - 1,
            Tri => d * n + (d - 1) * m - d,
            LWhite | LBroken | InWhite | OutWhite => 2 * n - 3,
            LBlack | Black => 2 * n - 2,
            InTri | OutTri => 2 * n + m - 2,
            Diamond => 2 * n + m - 1,
        }
    }

    /// The degree in the family's own convention: the face dimension for
    /// the A∞, Mor(A∞) and Mor(OCHA) families, minus it for the others.
    pub fn degree(self, family: Family) -> i64 {
        if family.cohomological() {
            -self.dim(family)
        } else {
            self.dim(family)
        }
    }

    pub fn is_valid(self) -> bool {
        use Glyph::*;
        let (n, m) = (self.n, self.m);
        match self.glyph {
            Ass | AWhite | ADashed | Lie | LWhite | LBroken | InWhite | OutWhite => {
                n >= 2 && m == 0
            }
            ABlack | LBlack | Black => n >= 1 && m == 0,
            Tri | InTri | OutTri => 2 * n + m >= 2,
            Diamond => 2 * n + m >= 1,
        }
    }

    /// Whether permuting symmetric children costs the permutation sign.
    pub fn skew(self, family: Family) -> bool {
        matches!(self.glyph, Glyph::Lie | Glyph::Tri) && family.dimension() % 2 == 1
    }

    pub fn check(self, family: Family) -> Result<(), OperadError> {
        if !family.glyphs().contains(&self.glyph) {
            return Err(OperadError::WrongFamily(self.glyph, family.to_string()));
        }
        let valid = match (self.glyph, family) {
            (Glyph::Tri, Family::Ocha(d)) if d != 2 => self.dim(family) >= 0,
            _ => self.is_valid(),
        };
        if !valid {
            return Err(OperadError::Arity {
                family: family.to_string(),
                glyph: self.glyph,
                n: self.n,
                m: self.m,
            });
        }
        Ok(())
    }

    /// Size used by the ∂² sweep bounds: n for single-colour families and
    /// 2n + m for the mixed ones.
    pub fn size(self, family: Family) -> u32 {
        match family {
            Family::Ocha(_) | Family::MorOcha => 2 * self.n + self.m,
            _ => self.n,
        }
    }

    /// S-expression head, e.g. `ass3`, `tri2.1`.
    pub fn head(self, family: Family) -> String {
        use Glyph::*;
        let name = match (self.glyph, family) {
            (Ass, _) => "ass",
            (AWhite, _) | (LWhite, _) => "w",
            (ABlack, _) | (LBlack, _) | (Black, _) => "b",
            (ADashed, _) => "dw",
            (LBroken, _) => "bw",
            (Lie, _) => "lie",
            (Tri, _) => "tri",
            (InWhite, _) => "iw",
            (InTri, _) => "it",
            (Diamond, _) => "dia",
            (OutWhite, _) => "ow",
            (OutTri, _) => "ot",
        };
        if matches!(self.glyph, Tri | InTri | Diamond | OutTri) {
            format!("{name}{}.{}", self.n, self.m)
        } else {
            format!("{name}{}", self.n)
        }
    }

    pub fn from_head(family: Family, head: &str) -> Option<Corolla> {
        let split = head.find(|c: char| c.is_ascii_digit())?;
        let (name, nums) = head.split_at(split);
        let (n, m) = match nums.split_once('.') {
            Some((a, b)) => (a.parse().ok()?, Some(b.parse().ok()?)),
            None => (nums.parse().ok()?, None),
        };
        use Glyph::*;
        let glyph = match (family, name) {
            (Family::AssInf, "ass") => Ass,
            (Family::MorAssInf, "w") => AWhite,
            (Family::MorAssInf, "b") => ABlack,
            (Family::MorAssInf, "dw") => ADashed,
            (Family::LieInf(_), "lie") | (Family::Ocha(_), "lie") => Lie,
            (Family::Ocha(_), "tri") => Tri,
            (Family::MorLieInf, "w") => LWhite,
            (Family::MorLieInf, "b") => LBlack,
            (Family::MorLieInf, "bw") => LBroken,
            (Family::MorOcha, "iw") => InWhite,
            (Family::MorOcha, "it") => InTri,
            (Family::MorOcha, "b") => Black,
            (Family::MorOcha, "dia") => Diamond,
            (Family::MorOcha, "ow") => OutWhite,
            (Family::MorOcha, "ot") => OutTri,
            _ => return None,
        };
        let two_index = matches!(glyph, Tri | InTri | Diamond | OutTri);
        match (two_index, m) {
            (true, Some(m)) => Some(Corolla::new(glyph, n, m)),
            (false, None) => Some(Corolla::new(glyph, n, 0)),
            _ => None,
        }
    }
}
