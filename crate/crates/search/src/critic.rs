//! LLM critic: proposes config edits from the scored population.

use glyphpress_core::config::{validate, RenderConfig};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::ops::{repair, Field, SearchSpace};
use crate::remote::{Endpoint, RemoteError};

pub trait CriticClient: Send + Sync {
    fn ask(&self, prompt: &str) -> Result<String, RemoteError>;
}

#[derive(Debug, Clone)]
pub struct RemoteCritic {
    pub endpoint: Endpoint,
}

impl CriticClient for RemoteCritic {
    fn ask(&self, prompt: &str) -> Result<String, RemoteError> {
        self.endpoint.chat(json!([{ "role": "user", "content": prompt }]))
    }
}

/// One scored configuration as shown to the critic.
#[derive(Debug, Clone, Serialize)]
pub struct CriticRow<'a> {
    pub config: &'a RenderConfig,
    pub accuracy: f64,
    pub rho: f64,
}

fn field_name(f: Field) -> &'static str {
    match f {
        Field::Dpi => "dpi",
        Field::PageSize => "page_size",
        Field::FontSize => "font_size_pt",
        Field::LineHeight => "line_height_pt",
        Field::Alignment => "alignment",
        Field::Margins => "margins_pt",
        Field::Indent => "indent",
        Field::Spacing => "spacing_pt",
        Field::HScale => "h_scale",
        Field::Colors => "colors",
        Field::Italic => "italic",
        Field::Borders => "borders",
        Field::NewlineMarkup => "newline_markup",
        Field::AutoCrop => "auto_crop",
    }
}

/// The request text: instructions plus a JSON table of the population
/// (best first) and the best configurations seen so far.
pub fn critic_prompt(population: &[CriticRow<'_>], top: &[CriticRow<'_>], n: usize, space: &SearchSpace) -> String {
    let fields: Vec<&str> = space.fields.iter().map(|f| field_name(*f)).collect();
    let table = json!({ "population": population, "best_so_far": top });
    format!(
        "You are tuning how long text is rendered into page images for a vision-language model. \
Each row is a rendering configuration with its validation accuracy and its compression ratio rho \
(text tokens per visual token). Propose {n} new configurations that keep accuracy high while \
raising rho. Reply with only a JSON array. Each element is an object of field edits applied to a \
population row chosen by \"parent\" (an index, default 0), for example \
{{\"parent\": 0, \"dpi\": 80, \"font_size_pt\": 9}}. Editable fields: {}.\n\n{}",
        fields.join(", "),
        table
    )
}

/// A parsed critic edit.
#[derive(Debug, Clone, PartialEq)]
pub struct Edit {
    pub parent: usize,
    pub fields: Map<String, Value>,
}

/// Extract the JSON array of edit objects from a reply; surrounding prose or
/// code fences are tolerated.
pub fn parse_edits(reply: &str) -> Result<Vec<Edit>, String> {
    let value: Value = match serde_json::from_str(reply.trim()) {
        Ok(v) => v,
        Err(_) => {
            let start = reply.find('[').ok_or("no JSON array in reply")?;
            let end = reply.rfind(']').ok_or("no JSON array in reply")?;
            if end < start {
                return Err("no JSON array in reply".into());
            }
            serde_json::from_str(&reply[start..=end]).map_err(|e| format!("unparseable reply: {e}"))?
        }
    };
    let items = match value {
        Value::Array(items) => items,
        Value::Object(_) => vec![value],
        _ => return Err("reply is not an array of edit objects".into()),
    };
    items
        .into_iter()
        .map(|item| {
            let Value::Object(mut fields) = item else {
                return Err("edit is not an object".to_string());
            };
            let parent = match fields.remove("parent") {
                None => 0,
                Some(v) => v.as_u64().ok_or("parent must be a non-negative integer")? as usize,
            };
            Ok(Edit { parent, fields })
        })
        .collect()
}

fn canonical_key(k: &str) -> &str {
    match k {
        "font_size" => "font_size_pt",
        "line_height" => "line_height_pt",
        "margins" | "margin" => "margins_pt",
        "spacing" => "spacing_pt",
        "page" => "page_size",
        other => other,
    }
}

/// Apply field edits to `config` through its JSON form.
pub fn apply_edit(config: &RenderConfig, fields: &Map<String, Value>) -> Result<RenderConfig, String> {
    let mut obj = match serde_json::to_value(config).expect("config serializes") {
        Value::Object(o) => o,
        _ => unreachable!(),
    };
    for (k, v) in fields {
        let key = canonical_key(k);
        if key == "schema_version" {
            continue;
        }
        if !obj.contains_key(key) {
            return Err(format!("unknown field {k:?}"));
        }
        let v = match (key, v) {
            ("margins_pt", Value::Number(n)) => {
                let m = n.as_f64().unwrap_or(f64::NAN);
                json!({ "top": m, "bottom": m, "left": m, "right": m })
            }
            ("dpi", Value::Number(n)) if n.as_i64().is_none() => {
                json!(n.as_f64().map(f64::round).unwrap_or(0.0) as i64)
            }
            _ => v.clone(),
        };
        obj.insert(key.to_string(), v);
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| format!("edit does not form a config: {e}"))
}

/// Result of one critic round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Proposals {
    pub configs: Vec<RenderConfig>,
    /// Raw reply, or the transport error.
    pub reply: Option<Result<String, String>>,
    /// Why fewer than the requested number of proposals came back.
    pub shortfall: Option<String>,
}

/// Ask for `n` proposals. Each edit is applied to its parent, restricted to
/// the active fields of `space`, repaired, and kept only if it validates.
/// `reply` short-circuits the call with a recorded answer.
pub fn critic_propose(
    population: &[CriticRow<'_>],
    top: &[CriticRow<'_>],
    critic: &dyn CriticClient,
    space: &SearchSpace,
    n: usize,
    recorded: Option<Result<String, String>>,
) -> Proposals {
    let reply = recorded.unwrap_or_else(|| {
        critic.ask(&critic_prompt(population, top, n, space)).map_err(|e| e.to_string())
    });
    let text = match &reply {
        Ok(t) => t.clone(),
        Err(e) => {
            return Proposals {
                configs: vec![],
                shortfall: Some(format!("critic unavailable: {e}")),
                reply: Some(reply),
            }
        }
    };
    let edits = match parse_edits(&text) {
        Ok(e) => e,
        Err(e) => return Proposals { configs: vec![], shortfall: Some(e), reply: Some(reply) },
    };
    let mut configs = Vec::new();
    let mut rejected = Vec::new();
    for (i, edit) in edits.iter().take(n).enumerate() {
        let Some(parent) = population.get(edit.parent) else {
            rejected.push(format!("edit {i}: no parent {}", edit.parent));
            continue;
        };
        match apply_edit(parent.config, &edit.fields) {
            Ok(mut c) => {
                for f in Field::ALL {
                    if !space.fields.contains(&f) {
                        f.copy(parent.config, &mut c);
                    }
                }
                repair(&mut c, space);
                let report = validate(&c);
                if report.valid {
                    configs.push(c);
                } else {
                    rejected.push(format!("edit {i}: {}", report.violations[0].rule_id));
                }
            }
            Err(e) => rejected.push(format!("edit {i}: {e}")),
        }
    }
    let shortfall = (configs.len() < n).then(|| {
        let mut why = format!("{} of {n} proposals usable", configs.len());
        if !rejected.is_empty() {
            why.push_str(": ");
            why.push_str(&rejected.join("; "));
        }
        why
    });
    Proposals { configs, reply: Some(reply), shortfall }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(&'static str);
    impl CriticClient for Fixed {
        fn ask(&self, _: &str) -> Result<String, RemoteError> {
            Ok(self.0.to_string())
        }
    }

    fn row(c: &RenderConfig) -> CriticRow<'_> {
        CriticRow { config: c, accuracy: 0.9, rho: 3.0 }
    }

    #[test]
    fn fixed_edit_round_trips() {
        let base = RenderConfig { font_size_pt: 10.0, line_height_pt: 11.0, ..RenderConfig::default() };
        let pop = [row(&base)];
        let p = critic_propose(&pop, &[], &Fixed(r#"[{"font_size": 9}]"#), &SearchSpace::full(), 1, None);
        assert_eq!(p.configs.len(), 1);
        assert_eq!(p.configs[0], RenderConfig { font_size_pt: 9.0, ..base.clone() });
        assert!(p.shortfall.is_none());
    }

    #[test]
    fn malformed_reply_reports_shortfall() {
        let base = RenderConfig::default();
        let pop = [row(&base)];
        let p = critic_propose(&pop, &[], &Fixed("sure! here you go {"), &SearchSpace::full(), 2, None);
        assert!(p.configs.is_empty());
        assert!(p.shortfall.is_some());
    }

    #[test]
    fn small_line_height_is_repaired() {
        let base = RenderConfig::default();
        let pop = [row(&base)];
        let reply = "```json\n[{\"parent\": 0, \"font_size_pt\": 12, \"line_height_pt\": 8}]\n```";
        let p = critic_propose(&pop, &[], &Fixed(reply), &SearchSpace::full(), 1, None);
        assert_eq!(p.configs.len(), 1);
        assert!(p.configs[0].line_height_pt >= p.configs[0].font_size_pt);
        assert!(validate(&p.configs[0]).valid);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let base = RenderConfig::default();
        assert!(apply_edit(&base, json!({"kerning": 2}).as_object().unwrap()).is_err());
        let m = apply_edit(&base, json!({"margins": 30, "dpi": 80.4}).as_object().unwrap()).unwrap();
        assert_eq!(m.margins_pt.left, 30.0);
        assert_eq!(m.dpi, 80);
    }
}
