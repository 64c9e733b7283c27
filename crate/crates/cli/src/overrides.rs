use serde_json::Value;

/// Parses `a.b.c=value`. The value is read as JSON, falling back to a string.
pub fn parse(arg: &str) -> Result<(Vec<String>, Value), String> {
    let (key, raw) = arg
        .split_once('=')
        .ok_or_else(|| format!("override {arg:?} is not key=value"))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(format!("override key {key:?} is malformed"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.split('.').map(String::from).collect(), value))
}

/// Sets `path` in `doc`, creating intermediate objects.
pub fn set(doc: &mut Value, path: &[String], value: Value) -> Result<(), String> {
    let mut cur = doc;
    for (i, seg) in path.iter().enumerate() {
        let last = i + 1 == path.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(seg.clone(), value);
                    return Ok(());
                }
                map.entry(seg.clone())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| format!("{seg:?} indexes an array"))?;
                let slot = items.get_mut(idx).ok_or_else(|| format!("index {idx} out of range"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("cannot descend into {:?} at {seg:?}", path[..i].join("."))),
        };
    }
    Err("empty override path".into())
}

pub fn apply(doc: &mut Value, args: &[String]) -> Result<(), String> {
    for a in args {
        let (path, value) = parse(a)?;
        set(doc, &path, value)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_and_typed() {
        let mut d = json!({"a": {"b": 1}, "xs": [1, 2]});
        apply(
            &mut d,
            &[
                "a.b=2.5".into(),
                "a.c=hello".into(),
                "xs.1=[3]".into(),
                "n.m=true".into(),
            ],
        )
        .unwrap();
        assert_eq!(
            d,
            json!({"a": {"b": 2.5, "c": "hello"}, "xs": [1, [3]], "n": {"m": true}})
        );
    }

    #[test]
    fn malformed() {
        assert!(parse("novalue").is_err());
        assert!(parse("a..b=1").is_err());
        let mut d = json!({"a": 1});
        assert!(apply(&mut d, &["a.b=1".into()]).is_err());
    }
}
