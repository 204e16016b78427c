//! Optional `key = value` config file layered under the flags:
//! flags > config file > built-in defaults.

use std::fmt::Write as _;

/// Extracts `--config <path>`, reads the file, and appends `--key value`
/// pairs for keys not already present on the command line. clap then sees
/// explicit flags first and config-supplied ones as ordinary arguments,
/// while built-in defaults cover the rest.
pub fn apply_config_layer(mut args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    if pos + 1 >= args.len() {
        return Err("--config requires a path".into());
    }
    let path = args.remove(pos + 1);
    args.remove(pos);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "config {path}: line {} is not `key = value`",
                lineno + 1
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!(
                "config {path}: line {} has an empty key or value",
                lineno + 1
            ));
        }
        let mut flag = String::new();
        let _ = write!(flag, "--{key}");
        if !args.iter().any(|a| a == &flag) {
            extra.push(flag);
            extra.push(value.to_string());
        }
    }
    args.extend(extra);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_win_over_config() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment\nn = 5\nseed = 9").unwrap();
        let path = file.path().to_str().unwrap().to_string();
        let args: Vec<String> = ["prog", "cmd", "--n", "7", "--config", &path]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let merged = apply_config_layer(args).unwrap();
        assert!(merged.iter().filter(|a| *a == "--n").count() == 1);
        assert!(merged.contains(&"--seed".to_string()));
        assert!(merged.contains(&"9".to_string()));
        assert!(!merged.contains(&"--config".to_string()));
    }

    #[test]
    fn malformed_config_is_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "not a pair").unwrap();
        let path = file.path().to_str().unwrap().to_string();
        let args = vec!["prog".to_string(), "--config".to_string(), path];
        assert!(apply_config_layer(args).is_err());
    }
}
