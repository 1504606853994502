pub mod evolve;
pub mod mesh;
pub mod solve;
pub mod verify;

/// Result of a command that ran to completion: its exit code and the
/// summary lines printed to stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn success(lines: Vec<String>) -> Self {
        Outcome { code: 0, lines }
    }
}
