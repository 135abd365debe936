//! Initial data A-F and the closed-form entropy solutions of the local
//! Burgers equation used as references, plus the exact nonlocal solution
//! available for datum D with a right-supported kernel.

/// Identifier of one of the six initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum InitialDatumId {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl InitialDatumId {
    pub const ALL: [InitialDatumId; 6] = [
        InitialDatumId::A,
        InitialDatumId::B,
        InitialDatumId::C,
        InitialDatumId::D,
        InitialDatumId::E,
        InitialDatumId::F,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Some(Self::A),
            "B" => Some(Self::B),
            "C" => Some(Self::C),
            "D" => Some(Self::D),
            "E" => Some(Self::E),
            "F" => Some(Self::F),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
            Self::E => "E",
            Self::F => "F",
        }
    }

    /// Abscissae where the datum formula switches pieces. Cell-average
    /// projection splits integration intervals at these points.
    pub fn breakpoints(&self) -> &'static [f64] {
        match self {
            Self::A => &[-2.0, -1.0, 0.0, 1.0, 2.0],
            Self::B => &[-1.0, 0.0],
            Self::C => &[-1.0, 1.0],
            Self::D => &[0.0],
            Self::E => &[-2.0, 0.0],
            Self::F => &[-1.0, 0.0],
        }
    }

    /// True if the datum vanishes outside a bounded interval.
    pub fn compact_support(&self) -> bool {
        !matches!(self, Self::D | Self::E)
    }
}

/// Identifier of a closed-form entropy solution of the local equation.
/// Data E and F have no closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactSolutionId {
    A,
    B,
    C,
    D,
}

/// Pointwise value of the initial datum. At jump points the left-limit
/// value is returned; the choice is invisible to cell averages.
pub fn initial_datum(id: InitialDatumId, x: f64) -> f64 {
    match id {
        // (x+2) on [-2,-1], 1 on ]-1,0], -1 on ]0,1], (x-2) on ]1,2]
        InitialDatumId::A => {
            if x < -2.0 {
                0.0
            } else if x <= -1.0 {
                x + 2.0
            } else if x <= 0.0 {
                1.0
            } else if x <= 1.0 {
                -1.0
            } else if x <= 2.0 {
                x - 2.0
            } else {
                0.0
            }
        }
        // indicator of [-1, 0]
        InitialDatumId::B => {
            if x > -1.0 && x <= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        // indicator of [-1, 1]
        InitialDatumId::C => {
            if x > -1.0 && x <= 1.0 {
                1.0
            } else {
                0.0
            }
        }
        // indicator of ]-inf, 0]
        InitialDatumId::D => {
            if x <= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        // smooth ramp from 0 to 1/2 on [-2, 0], then constant 1/2
        InitialDatumId::E => {
            if x < -2.0 {
                0.0
            } else if x <= 0.0 {
                0.25 * (1.0 + (std::f64::consts::FRAC_PI_2 * x).cos())
            } else {
                0.5
            }
        }
        // (x+1) on [-1, 0]
        InitialDatumId::F => {
            if x > -1.0 && x <= 0.0 {
                x + 1.0
            } else {
                0.0
            }
        }
    }
}

/// Entropy admissible solution of the local Burgers equation
/// `rho_t + (rho^2)_x = 0` for the data with a closed form.
/// Regions are checked left to right, first match wins; the formulas
/// agree at shared endpoints.
pub fn exact_local(id: ExactSolutionId, t: f64, x: f64) -> f64 {
    assert!(t >= 0.0, "exact_local requires t >= 0");
    if t == 0.0 {
        let datum = match id {
            ExactSolutionId::A => InitialDatumId::A,
            ExactSolutionId::B => InitialDatumId::B,
            ExactSolutionId::C => InitialDatumId::C,
            ExactSolutionId::D => InitialDatumId::D,
        };
        return initial_datum(datum, x);
    }
    match id {
        ExactSolutionId::A => exact_a(t, x),
        ExactSolutionId::B => exact_b(t, x),
        ExactSolutionId::C => exact_c(t, x),
        ExactSolutionId::D => exact_d(t, x),
    }
}

fn exact_a(t: f64, x: f64) -> f64 {
    if !(-2.0..=2.0).contains(&x) {
        return 0.0;
    }
    if t <= 0.5 {
        if x <= 2.0 * t - 1.0 {
            (x + 2.0) / (2.0 * t + 1.0)
        } else if x <= 0.0 {
            1.0
        } else if x <= 1.0 - 2.0 * t {
            -1.0
        } else {
            (x - 2.0) / (2.0 * t + 1.0)
        }
    } else if x <= 0.0 {
        (x + 2.0) / (2.0 * t + 1.0)
    } else {
        (x - 2.0) / (2.0 * t + 1.0)
    }
}

fn exact_b(t: f64, x: f64) -> f64 {
    if x < -1.0 {
        return 0.0;
    }
    if t <= 1.0 {
        if x <= 2.0 * t - 1.0 {
            (x + 1.0) / (2.0 * t)
        } else if x <= t {
            1.0
        } else {
            0.0
        }
    } else if x <= 2.0 * t.sqrt() - 1.0 {
        (x + 1.0) / (2.0 * t)
    } else {
        0.0
    }
}

fn exact_c(t: f64, x: f64) -> f64 {
    if x < -1.0 {
        return 0.0;
    }
    if t <= 2.0 {
        if x <= 2.0 * t - 1.0 {
            (x + 1.0) / (2.0 * t)
        } else if x <= t + 1.0 {
            1.0
        } else {
            0.0
        }
    } else if x <= 2.0 * (2.0 * t).sqrt() - 1.0 {
        (x + 1.0) / (2.0 * t)
    } else {
        0.0
    }
}

fn exact_d(t: f64, x: f64) -> f64 {
    if x <= t {
        1.0
    } else {
        0.0
    }
}

/// Exact solution of the nonlocal equation for datum D with a kernel
/// supported on [0, eps]: the shock `x = t` is a solution of the nonlocal
/// equation for every eps, so it coincides with the local entropy solution.
pub fn exact_nonlocal_d(t: f64, x: f64) -> f64 {
    exact_local(ExactSolutionId::D, t, x)
}
