use crate::error::Result;
use crate::spaces::{Domain, Space};
use crate::value::Value;

/// A finite map between values, kept in declaration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    entries: Vec<(Value, Value)>,
}

impl Table {
    pub fn new(entries: Vec<(Value, Value)>) -> Self {
        Table { entries }
    }

    /// Tabulates `f` over every state of a finite space.
    pub fn tabulate<D: Domain>(space: &Space<D>, mut f: impl FnMut(&Value) -> Value) -> Result<Self> {
        Ok(Table {
            entries: space
                .enumerate_values()?
                .into_iter()
                .map(|k| {
                    let v = f(&k);
                    (k, v)
                })
                .collect(),
        })
    }

    pub fn get(&self, key: &Value) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(Value, Value)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks the table is a total function from `from` into `to`.
    pub(crate) fn check_total<A: Domain, B: Domain>(
        &self,
        from: &Space<A>,
        to: &Space<B>,
    ) -> std::result::Result<(), String> {
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if !from.admits(k) {
                return Err(format!("key {k} is outside `{}`", from.id()));
            }
            if !to.admits(v) {
                return Err(format!("image {v} of {k} is outside `{}`", to.id()));
            }
            if self.entries[..i].iter().any(|(prev, _)| prev == k) {
                return Err(format!("key {k} appears twice"));
            }
        }
        let keys = from
            .enumerate_values()
            .map_err(|_| format!("`{}` is not finite", from.id()))?;
        if let Some(missing) = keys.iter().find(|k| self.get(k).is_none()) {
            return Err(format!("no entry for {missing}"));
        }
        Ok(())
    }
}
