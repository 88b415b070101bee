use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Declares a subcommand whose options are all optional strings, so that flags and config
/// keys go through the same parser.
macro_rules! keyed_args {
    ($(#[$meta:meta])* $name:ident { $($field:ident => $key:literal $([$($attr:tt)*])? : $help:literal),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Args, Debug, Default, Clone)]
        pub struct $name {
            $(
                #[arg(long = $key, help = $help, value_name = "VALUE" $(, $($attr)*)?)]
                pub $field: Option<String>,
            )*
        }

        impl $name {
            pub const KEYS: &'static [&'static str] = &[$($key),*];

            pub fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
                vec![$(($key, self.$field.clone())),*]
            }
        }
    };
}

keyed_args!(GlobalArgs {
    seed => "seed" [global = true]: "Seed for every sampled quantity [default: 7]",
    threads => "threads" [global = true, env = "SPECDISC_THREADS"]: "Worker threads (results do not depend on it)",
    out_dir => "out-dir" [global = true]: "Directory for report.json, CSV tables and plot data",
    format => "format" [global = true]: "Output on stdout: json or csv [default: json]",
    plot => "plot" [global = true, num_args = 0..=1, default_missing_value = "true"]: "Also write two-column plot data files",
});

keyed_args!(RearrangeArgs {
    space => "space": "JSON space file {atoms: [{id, mass, value}], total_mass}",
    field => "field": "JSON array of field values (default: the atom values)",
    t_list => "t-list": "Comma-separated masses t",
});

keyed_args!(OptcoverArgs {
    space => "space": "JSON space file",
    field => "field": "JSON array of field values (default: the atom values)",
    t => "t": "Mass t in (0, total mass)",
    theta => "theta": "theta > 1 for the two-sided bound [default: 2]",
    slack => "slack": "Relative slack of the bound comparison [default: 1e-12]",
});

keyed_args!(PolyhedronArgs {
    check => "check": "pushforward | dominance | lemma42",
    dim => "dim": "Dimension, 3..=5 [default: 3]",
    radius => "radius": "Ball radius [default: 1]",
    samples => "samples": "Number of random intervals, boxes or fields",
    slabs => "slabs": "Slabs along the first axis",
    transverse => "transverse": "Transverse cells per axis",
    cells_per_side => "cells-per-side": "Grid cells per side of the sub-cube (lemma42) [default: 8]",
    tol => "tol": "Acceptance tolerance",
});

keyed_args!(DenseArgs {
    system => "system": "cantor | cylinder | product [default: cantor]",
    levels => "levels": "Number of built levels",
    dim => "dim": "Dimension of the cylinder system [default: 2]",
    theta => "theta": "Override theta, as p/q or a decimal",
    samples => "samples": "Random query cubes [default: 10000]",
    structured_levels => "structured-levels": "Levels used for structured query cubes [default: 6]",
    bits => "bits": "Binary refinement of sampled coordinates [default: 16]",
});

keyed_args!(PotentialArgs {
    alpha => "alpha": "Exponent in (0, 2) [default: 1]",
    n_rule => "n-rule" [visible_alias = "N-rule"]: "log | sqrt | linear | one-plus-linear | table:a,b,... [default: linear]",
    dim => "dim": "Dimension [default: 3]",
    eval => "eval": "Points `x1,x2,...;y1,y2,...` at which to evaluate",
    cell => "cell": "Cell `l1,l2,... j n`: leftmost level-n cell of D_j in the cube l",
    fraction => "fraction" [num_args = 0..=1, default_missing_value = "true"]: "Report the positivity fraction of --cell",
});

keyed_args!(ConditionsArgs {
    which => "which": "thm35 | thm36 | thm313 | gmd | ex54 | ex55",
    alpha => "alpha": "Exponent in (0, 2) [default: 1]",
    n_rule => "n-rule" [visible_alias = "N-rule"]: "Amplitude rule [default: linear]",
    dim => "dim": "Dimension [default: 3]",
    potential => "potential": "valpha | zero | const:c | quadratic [default: valpha]",
    centers => "centers": "Center indices k; centers are (k + 1/2, 1/2, ...) [default: 2..10]",
    r => "r": "Domain radius [default: 1/3]",
    gamma => "gamma": "Scale rule power:e[:c] | power-log:e[:c] | const:c",
    theta => "theta": "Also check the two-sided cover bound with this theta (thm35, thm36)",
    family => "family": "cube | inscribed-cube | ball [default: cube]",
    resolution => "resolution": "Grid cells per axis of each domain [default: 24]",
    window => "window": "Trailing window of the divergence verdict [default: 4]",
    n => "n": "Levels n (ex54, default 1..6) or the cell level (thm313, default 1)",
    cell_level => "cell-level": "Cell level of the ex54 cell condition [default: 2]",
    l => "l": "Cube indices |l| along the first axis [ex54: 3..10, thm313: 4..9]",
    delta => "delta": "GMD level delta [default: 1/2]",
    c => "c": "GMD constant c [default: 1/10]",
    tolerance => "tolerance": "Comparison tolerance [default: 1e-12]",
    j => "j": "Scales j (ex55) [default: 1..12]",
});

keyed_args!(SpectralArgs {
    potential => "potential": "valpha | zero | const:c | quadratic [default: valpha]",
    alpha => "alpha": "Exponent of valpha [default: 1/2]",
    n_rule => "n-rule" [visible_alias = "N-rule"]: "Amplitude rule [default: linear]",
    dim => "dim": "Dimension [default: 3]",
    windows => "windows": "Window centers (k, 0, ...) [default: 2..8]",
    half => "half": "Window half-width [default: 4]",
    nodes => "nodes": "Interior nodes per axis [default: 24]",
    k => "k": "Number of eigenvalues [default: 1]",
    discretization => "discretization": "cell-average | pointwise [default: cell-average]",
    tol => "tol": "Residual tolerance [default: 1e-8]",
});

keyed_args!(GoldenArgs {
    atol => "atol": "Absolute tolerance [default: 1e-12]",
    rtol => "rtol": "Relative tolerance [default: 1e-9]",
});

#[derive(Subcommand, Debug, Clone)]
pub enum GoldenAction {
    /// List every difference between a report and a golden file.
    Compare {
        report: PathBuf,
        golden: PathBuf,
        #[command(flatten)]
        tol: GoldenArgs,
    },
    /// Store a report as the golden file.
    Bless { report: PathBuf, golden: PathBuf },
}

// Parsed once per process, so the size of the largest variant does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Lower and upper rearrangements at a list of masses.
    Rearrange(RearrangeArgs),
    /// Optimal covering value and its bounds.
    Optcover(OptcoverArgs),
    /// Checks of the capacity-weighted measure.
    Polyhedron(PolyhedronArgs),
    /// Sampled verification of a dense system.
    DenseVerify(DenseArgs),
    /// Evaluate the oscillating potential.
    Potential(PotentialArgs),
    /// Traces of the sufficient conditions.
    Conditions(ConditionsArgs),
    /// Lowest Dirichlet energies on moving windows.
    Spectral(SpectralArgs),
    /// Golden file management.
    Golden {
        #[command(subcommand)]
        action: GoldenAction,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rearrange(_) => "rearrange",
            Command::Optcover(_) => "optcover",
            Command::Polyhedron(_) => "polyhedron",
            Command::DenseVerify(_) => "dense-verify",
            Command::Potential(_) => "potential",
            Command::Conditions(_) => "conditions",
            Command::Spectral(_) => "spectral",
            Command::Golden { .. } => "golden",
        }
    }

    pub fn schema(&self) -> &'static [&'static str] {
        match self {
            Command::Rearrange(_) => RearrangeArgs::KEYS,
            Command::Optcover(_) => OptcoverArgs::KEYS,
            Command::Polyhedron(_) => PolyhedronArgs::KEYS,
            Command::DenseVerify(_) => DenseArgs::KEYS,
            Command::Potential(_) => PotentialArgs::KEYS,
            Command::Conditions(_) => ConditionsArgs::KEYS,
            Command::Spectral(_) => SpectralArgs::KEYS,
            Command::Golden { .. } => GoldenArgs::KEYS,
        }
    }

    pub fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Rearrange(a) => a.pairs(),
            Command::Optcover(a) => a.pairs(),
            Command::Polyhedron(a) => a.pairs(),
            Command::DenseVerify(a) => a.pairs(),
            Command::Potential(a) => a.pairs(),
            Command::Conditions(a) => a.pairs(),
            Command::Spectral(a) => a.pairs(),
            Command::Golden {
                action: GoldenAction::Compare { tol, .. },
            } => tol.pairs(),
            Command::Golden { .. } => Vec::new(),
        }
    }
}

/// Experiments on rearrangements, capacity measures, dense systems and oscillating potentials.
#[derive(Parser, Debug)]
#[command(name = "specdisc", version)]
pub struct Cli {
    /// Key-value config file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}
