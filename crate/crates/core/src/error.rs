use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate cell {cell}: {msg}")]
    DegenerateCell { cell: usize, msg: String },

    #[error("non-manifold face {face:?} shared by {count} cells")]
    NonManifold { face: Vec<usize>, count: usize },

    #[error("mesh is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("node {node} has an empty adjacency list")]
    EmptyAdjacency { node: usize },

    #[error("negative cross section in region {region}: sigma_t = {sigma_t}, sigma_s = {sigma_s}")]
    NegativeCrossSection { region: usize, sigma_t: f64, sigma_s: f64 },

    #[error("singular matrix at row {row} (node {node}, angle {angle})")]
    Singular { row: usize, node: usize, angle: usize },

    #[error("source iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    NotConverged { iterations: usize, last_update: f64 },

    #[error("division guard: {0} has zero norm")]
    ZeroNorm(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
