//! Command-line front end for the dynspec-core library: argument
//! definitions, strict JSON input and report rendering.
//!
//! Exit codes: 0 yes / verified, 1 no / failed, 2 inconclusive or error.

pub mod commands;
pub mod docs;
pub mod input;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dynspec_core::SurfaceClass;

#[derive(Parser, Debug)]
#[command(
    name = "dynspec",
    version,
    about = "Salem numbers, lattices and realizability certificates"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Print per-stage wall-clock timings to standard error.
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Torus,
    K3,
    Enriques,
}

impl From<ClassArg> for SurfaceClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Torus => SurfaceClass::Torus,
            ClassArg::K3 => SurfaceClass::K3,
            ClassArg::Enriques => SurfaceClass::Enriques,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SearchCaps {
    /// Largest prime tried by the split-prime search.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub prime_cap: u64,
    /// Coefficient bound for the norm-element search.
    #[arg(long = "box", default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub box_radius: u64,
    /// Largest exponent l with N(t) = p^l accepted by the norm-element search.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_exponent: u32,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a polynomial is a Salem polynomial.
    CertifySalem { poly: PathBuf },
    /// Decide whether the Salem number is a dynamical degree on a surface class.
    Realizable {
        poly: PathBuf,
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long)]
        projective: bool,
    },
    /// Decide whether L ⊗ Q has an isometry with characteristic polynomial s(x)(x-1)^(rk L - d).
    RationalIsometry {
        poly: PathBuf,
        /// Lattice JSON file or built-in name (3U, U+E8, 3U+2E8).
        lattice: String,
    },
    /// Build a realization certificate from a seed (curated if --seed is omitted).
    BuildCertificate {
        poly: PathBuf,
        #[arg(long)]
        seed: Option<PathBuf>,
        /// Class of the curated seed used when --seed is omitted.
        #[arg(long, value_enum, default_value_t = ClassArg::K3)]
        class: ClassArg,
        /// Search split primes above this bound instead of the default bound.
        #[arg(long)]
        prime_lower_bound: Option<u64>,
        /// Twist by t^2 instead of trying t first.
        #[arg(long)]
        square_twist: bool,
        #[command(flatten)]
        caps: SearchCaps,
    },
    /// Re-run every check on a certificate.
    Verify { cert: PathBuf },
    /// Decide whether an isometry preserves a chamber.
    Positivity {
        isometry: PathBuf,
        /// Bound on the orbit length for cyclic roots.
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        orbit_bound: u64,
        /// Run the exhaustive obstructing-root search even if the determinant bound decides.
        #[arg(long)]
        search: bool,
    },
    /// Twist the form of an isometry by a(f + f^-1).
    Twist {
        isometry: PathBuf,
        /// Coefficients of a(w), ascending, comma separated (e.g. `25,3` for 3w + 25).
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        /// Twist by a^k.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        power: u32,
    },
    /// Smallest n with f^n integral.
    PowerIntegral { isometry: PathBuf },
    /// Twist by t^n with N(t) = p and check the p-part of the discriminant form.
    TwistSplitCheck {
        isometry: PathBuf,
        /// The exponent n.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        exponent: u32,
        /// The prime p; found by the split-prime search if omitted.
        #[arg(long)]
        prime: Option<u64>,
        /// The element t (ascending coefficients of t(w)); found by search if omitted.
        #[arg(long, allow_hyphen_values = true)]
        element: Option<String>,
        /// Lower bound for the split-prime search.
        #[arg(long, default_value_t = 2)]
        prime_lower_bound: u64,
        #[command(flatten)]
        caps: SearchCaps,
    },
    /// Invariants and discriminant form of a lattice.
    Lattice {
        /// Lattice JSON file or built-in name (U, E8, 3U, U+E8, 3U+2E8, A2, D4(-1), ...).
        lattice: String,
    },
    /// Glue two lattices along an anti-isometry of their discriminant forms.
    Glue { first: String, second: String },
}
