//! JSON instance schema:
//!
//! ```json
//! {"workers":[{"id":1,"group":1,"cost":"2.5","bid":"2.5","reputation":"1.0"}],
//!  "requesters":[{"id":1,"budget":"40"}],"tau":[[2]],"epsilon":"10","seed":42}
//! ```
//!
//! Money fields are decimal or `"p/q"` strings. `cost` may be omitted,
//! `epsilon` defaults to 10 and `seed` to 0.

use serde_json::{Map, Value};

use super::instance::{
    default_epsilon, CompatibilityMatrix, GroupId, Instance, Requester, RequesterId, Worker, WorkerId,
};
use super::money::{format_rational, parse_rational, Money, Rational};
use super::ModelError;

pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    instance_from_value(&doc)
}

pub fn instance_from_value(doc: &Value) -> Result<Instance, ModelError> {
    let root = doc
        .as_object()
        .ok_or_else(|| ModelError::invalid("$", "expected an object"))?;
    let workers = array(root, "workers", "$")?
        .iter()
        .enumerate()
        .map(|(k, v)| parse_worker(v, &format!("$.workers[{}]", k)))
        .collect::<Result<Vec<_>, _>>()?;
    let requesters = array(root, "requesters", "$")?
        .iter()
        .enumerate()
        .map(|(k, v)| parse_requester(v, &format!("$.requesters[{}]", k)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (l, row) in array(root, "tau", "$")?.iter().enumerate() {
        let path = format!("$.tau[{}]", l);
        let cells = row
            .as_array()
            .ok_or_else(|| ModelError::invalid(&path, "expected an array"))?;
        let parsed = cells
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.as_u64()
                    .ok_or_else(|| ModelError::invalid(format!("{}[{}]", path, j), "expected a non-negative integer"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(parsed);
    }
    let epsilon = match root.get("epsilon") {
        None | Some(Value::Null) => default_epsilon(),
        Some(v) => rational_field(v, "$.epsilon")?,
    };
    let seed = match root.get("seed") {
        None | Some(Value::Null) => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| ModelError::invalid("$.seed", "expected an unsigned integer"))?,
    };
    Instance::new(workers, requesters, CompatibilityMatrix::new(rows), epsilon, seed)
}

fn array<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Vec<Value>, ModelError> {
    obj.get(key)
        .ok_or_else(|| ModelError::invalid(format!("{}.{}", path, key), "missing field"))?
        .as_array()
        .ok_or_else(|| ModelError::invalid(format!("{}.{}", path, key), "expected an array"))
}

fn id_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<u32, ModelError> {
    let p = format!("{}.{}", path, key);
    let v = obj.get(key).ok_or_else(|| ModelError::invalid(&p, "missing field"))?;
    v.as_u64()
        .filter(|&x| x >= 1 && x <= u32::MAX as u64)
        .map(|x| x as u32)
        .ok_or_else(|| ModelError::invalid(&p, "expected a positive integer"))
}

fn rational_field(v: &Value, path: &str) -> Result<Rational, ModelError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| ModelError::invalid(path, e.to_string())),
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            parse_rational(&n.to_string()).map_err(|e| ModelError::invalid(path, e.to_string()))
        }
        _ => Err(ModelError::invalid(path, "expected a decimal or p/q string")),
    }
}

fn money_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Money, ModelError> {
    let p = format!("{}.{}", path, key);
    let v = obj.get(key).ok_or_else(|| ModelError::invalid(&p, "missing field"))?;
    let r = rational_field(v, &p)?;
    Money::from_rational(r).map_err(|e| ModelError::invalid(&p, e.to_string()))
}

fn parse_worker(v: &Value, path: &str) -> Result<Worker, ModelError> {
    let obj = v
        .as_object()
        .ok_or_else(|| ModelError::invalid(path, "expected an object"))?;
    let cost = match obj.get("cost") {
        None | Some(Value::Null) => None,
        Some(_) => Some(money_field(obj, "cost", path)?),
    };
    let rep_path = format!("{}.reputation", path);
    let reputation = rational_field(
        obj.get("reputation")
            .ok_or_else(|| ModelError::invalid(&rep_path, "missing field"))?,
        &rep_path,
    )?;
    Ok(Worker {
        id: WorkerId(id_field(obj, "id", path)?),
        group: GroupId(id_field(obj, "group", path)?),
        cost,
        bid: money_field(obj, "bid", path)?,
        reputation,
    })
}

fn parse_requester(v: &Value, path: &str) -> Result<Requester, ModelError> {
    let obj = v
        .as_object()
        .ok_or_else(|| ModelError::invalid(path, "expected an object"))?;
    Ok(Requester {
        id: RequesterId(id_field(obj, "id", path)?),
        budget: money_field(obj, "budget", path)?,
    })
}

pub fn instance_to_value(inst: &Instance) -> Value {
    let workers: Vec<Value> = inst
        .workers()
        .iter()
        .map(|w| {
            let mut o = Map::new();
            o.insert("id".into(), Value::from(w.id.0));
            o.insert("group".into(), Value::from(w.group.0));
            if let Some(c) = &w.cost {
                o.insert("cost".into(), Value::from(c.to_string()));
            }
            o.insert("bid".into(), Value::from(w.bid.to_string()));
            o.insert("reputation".into(), Value::from(format_rational(&w.reputation)));
            Value::Object(o)
        })
        .collect();
    let requesters: Vec<Value> = inst
        .requesters()
        .iter()
        .map(|r| {
            let mut o = Map::new();
            o.insert("id".into(), Value::from(r.id.0));
            o.insert("budget".into(), Value::from(r.budget.to_string()));
            Value::Object(o)
        })
        .collect();
    let tau: Vec<Value> = inst.tau().rows().iter().map(|row| Value::from(row.clone())).collect();
    let mut o = Map::new();
    o.insert("workers".into(), Value::from(workers));
    o.insert("requesters".into(), Value::from(requesters));
    o.insert("tau".into(), Value::from(tau));
    o.insert("epsilon".into(), Value::from(format_rational(inst.epsilon())));
    o.insert("seed".into(), Value::from(inst.seed()));
    Value::Object(o)
}

pub fn serialize_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(&instance_to_value(inst)).expect("instance JSON is always serializable")
}
