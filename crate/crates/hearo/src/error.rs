use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible for the requested operation.
    #[error("{op}: incompatible shapes {lhs_rows}x{lhs_cols} and {rhs_rows}x{rhs_cols}")]
    Shape {
        op: &'static str,
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },

    /// A malformed input file.
    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },

    /// An argument violated a precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Training produced a non-finite cost; λ is likely too large.
    #[error("training diverged at epoch {epoch} (last finite cost {last_cost})")]
    Divergence { epoch: usize, last_cost: f64 },

    /// An error that occurred while processing one cross-validation fold.
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(op: &'static str, lhs: (usize, usize), rhs: (usize, usize)) -> Self {
        Error::Shape {
            op,
            lhs_rows: lhs.0,
            lhs_cols: lhs.1,
            rhs_rows: rhs.0,
            rhs_cols: rhs.1,
        }
    }

    pub fn parse(line: usize, column: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn argument(message: impl Into<String>) -> Self {
        Error::Argument(message.into())
    }

    pub fn in_fold(fold: usize, source: Error) -> Self {
        Error::Fold {
            fold,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
