use std::fmt;

use cdwe::ErrorClass;

#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            class: ErrorClass::Config,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            class: ErrorClass::Data,
            message: message.into(),
        }
    }

    #[cfg(test)]
    pub fn class_name(&self) -> &'static str {
        self.class.name()
    }

    /// One JSON object on one line.
    pub fn report_line(&self) -> String {
        serde_json::json!({
            "error": self.class.name(),
            "exit_code": self.class.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.class.name(), self.message)
    }
}

impl From<cdwe::Error> for CliError {
    fn from(e: cdwe::Error) -> Self {
        CliError {
            class: e.class(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}
