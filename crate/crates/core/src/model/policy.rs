use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    /// Keep tossing.
    White,
    /// Stop and declare `1/2 + eps`.
    Blue,
    /// Stop and declare `1/2 - eps`.
    Red,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::White, Color::Blue, Color::Red];

    pub fn is_stop(self) -> bool {
        self != Color::White
    }

    pub fn symbol(self) -> char {
        match self {
            Color::White => '.',
            Color::Blue => 'B',
            Color::Red => 'R',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Color> {
        match ch {
            '.' => Some(Color::White),
            'B' => Some(Color::Blue),
            'R' => Some(Color::Red),
            _ => None,
        }
    }

    /// The declaration a stopping cell at `(h, t)` should make: the more
    /// frequent outcome, with ties (the diagonal) going Blue.
    pub fn majority(h: usize, t: usize) -> Color {
        if h >= t {
            Color::Blue
        } else {
            Color::Red
        }
    }
}

/// How cells with `h + t >= horizon` are colored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// The linear policy `P_c`: stop once `|h - t| >= c`, declaring the majority.
    LinearTail { c: u32 },
    /// Every cell stops and declares the majority.
    ForcedStop,
}

impl Closure {
    pub fn color(self, h: usize, t: usize) -> Color {
        match self {
            Closure::ForcedStop => Color::majority(h, t),
            Closure::LinearTail { c } => linear_color(c, h, t),
        }
    }

    pub fn threshold(self) -> Option<u32> {
        match self {
            Closure::LinearTail { c } => Some(c),
            Closure::ForcedStop => None,
        }
    }
}

/// Color of `(h, t)` under the pure linear policy `P_c`.
pub fn linear_color(c: u32, h: usize, t: usize) -> Color {
    let diff = h as i64 - t as i64;
    let c = c as i64;
    if diff >= c {
        Color::Blue
    } else if diff <= -c {
        Color::Red
    } else {
        Color::White
    }
}

#[inline]
fn index(h: usize, t: usize) -> usize {
    let d = h + t;
    d * (d + 1) / 2 + h
}

/// A lattice policy: explicit colors on the triangle `h + t < horizon` and a
/// closure rule everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    horizon: usize,
    cells: Vec<Color>,
    closure: Closure,
}

impl Policy {
    /// Builds a policy by querying `color` on every explicit cell.
    pub fn from_fn(
        horizon: usize,
        closure: Closure,
        mut color: impl FnMut(usize, usize) -> Color,
    ) -> Result<Self> {
        let mut cells = Vec::with_capacity(horizon * (horizon + 1) / 2);
        for d in 0..horizon {
            for h in 0..=d {
                cells.push(color(h, d - h));
            }
        }
        Self::from_cells(horizon, cells, closure)
    }

    fn from_cells(horizon: usize, cells: Vec<Color>, closure: Closure) -> Result<Self> {
        if let Closure::LinearTail { c } = closure {
            if c == 0 {
                return Err(invalid("linear tail threshold must be at least 1"));
            }
        }
        debug_assert_eq!(cells.len(), horizon * (horizon + 1) / 2);
        let policy = Self {
            horizon,
            cells,
            closure,
        };
        policy.check_seam()?;
        Ok(policy)
    }

    /// The pure linear (difference) policy `P_c`.
    pub fn linear(c: u32) -> Result<Self> {
        Self::from_cells(0, Vec::new(), Closure::LinearTail { c })
    }

    /// `P_0`: declare `1/2 + eps` at the origin without tossing.
    pub fn declare_immediately() -> Self {
        Self {
            horizon: 0,
            cells: Vec::new(),
            closure: Closure::ForcedStop,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    pub fn color_at(&self, h: usize, t: usize) -> Color {
        if h + t < self.horizon {
            self.cells[index(h, t)]
        } else {
            self.closure.color(h, t)
        }
    }

    /// The stored color, if `(h, t)` lies in the explicit region.
    pub fn explicit(&self, h: usize, t: usize) -> Option<Color> {
        (h + t < self.horizon).then(|| self.cells[index(h, t)])
    }

    /// Explicit cells in anti-diagonal order.
    pub fn explicit_cells(&self) -> impl Iterator<Item = (usize, usize, Color)> + '_ {
        (0..self.horizon)
            .flat_map(|d| (0..=d).map(move |h| (h, d - h)))
            .map(|(h, t)| (h, t, self.cells[index(h, t)]))
    }

    /// Copy with the listed cells recolored; every cell must be explicit.
    pub fn with_colors(&self, changes: &[(usize, usize, Color)]) -> Result<Self> {
        let mut cells = self.cells.clone();
        for &(h, t, color) in changes {
            if h + t >= self.horizon {
                return Err(invalid(format!(
                    "cell ({h}, {t}) is outside the explicit region (horizon {})",
                    self.horizon
                )));
            }
            cells[index(h, t)] = color;
        }
        Self::from_cells(self.horizon, cells, self.closure)
    }

    /// Same coloring with the explicit region grown to `horizon` by copying the
    /// closure. Never shrinks.
    pub fn materialize(&self, horizon: usize) -> Self {
        if horizon <= self.horizon {
            return self.clone();
        }
        let mut cells = self.cells.clone();
        cells.reserve(horizon * (horizon + 1) / 2 - cells.len());
        for d in self.horizon..horizon {
            for h in 0..=d {
                cells.push(self.closure.color(h, d - h));
            }
        }
        Self {
            horizon,
            cells,
            closure: self.closure,
        }
    }

    /// Same coloring with the smallest horizon that still satisfies the seam
    /// invariant.
    pub fn normalized(&self) -> Self {
        let mut horizon = self.horizon;
        while horizon > 0 {
            let d = horizon - 1;
            let matches_closure = (0..=d).all(|h| self.cells[index(h, d - h)] == self.closure.color(h, d - h));
            if !matches_closure || !self.seam_ok_at(horizon - 1) {
                break;
            }
            horizon -= 1;
        }
        let mut cells = self.cells.clone();
        cells.truncate(horizon * (horizon + 1) / 2);
        Self {
            horizon,
            cells,
            closure: self.closure,
        }
    }

    /// Cell-by-cell equality of the two colorings over the whole quadrant.
    pub fn same_coloring(&self, other: &Policy) -> bool {
        if self.closure != other.closure {
            return false;
        }
        let n = self.horizon.max(other.horizon);
        (0..n).all(|d| (0..=d).all(|h| self.color_at(h, d - h) == other.color_at(h, d - h)))
    }

    fn seam_ok_at(&self, horizon: usize) -> bool {
        self.seam_violation_at(horizon).is_none()
    }

    fn seam_violation_at(&self, horizon: usize) -> Option<(usize, usize, u32)> {
        let Closure::LinearTail { c } = self.closure else {
            return None;
        };
        if horizon == 0 {
            return None;
        }
        let d = horizon - 1;
        (0..=d).map(|h| (h, d - h)).find_map(|(h, t)| {
            let far = (h as i64 - t as i64).unsigned_abs() > c as u64;
            (far && !self.cells[index(h, t)].is_stop()).then_some((h, t, c))
        })
    }

    fn check_seam(&self) -> Result<()> {
        match self.seam_violation_at(self.horizon) {
            Some((h, t, c)) => Err(Error::SeamViolation { h, t, c }),
            None => Ok(()),
        }
    }

    /// Renders `rows x cols` cells as `.`/`B`/`R`, one row per tails count.
    pub fn grid(&self, rows: usize, cols: usize) -> String {
        let mut out = String::with_capacity(rows * (cols + 1));
        for t in 0..rows {
            out.extend((0..cols).map(|h| self.color_at(h, t).symbol()));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
