use std::collections::HashMap;
use std::path::Path;

pub const UNK: &str = "<unk>";

/// String-to-row mapping; row 0 is the shared unknown entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocab {
    pub fn new() -> Self {
        let mut v = Vocab {
            items: Vec::new(),
            index: HashMap::new(),
        };
        v.add(UNK);
        v
    }

    pub fn add(&mut self, s: &str) -> usize {
        if let Some(&i) = self.index.get(s) {
            return i;
        }
        self.index.insert(s.to_string(), self.items.len());
        self.items.push(s.to_string());
        self.items.len() - 1
    }

    /// Row for `s`, or the unknown row.
    pub fn id(&self, s: &str) -> usize {
        self.index.get(s).copied().unwrap_or(0)
    }

    pub fn get(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn item(&self, i: usize) -> &str {
        &self.items[i]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.len() <= 1
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.items[1..].iter().map(|s| format!("{s}\n")).collect::<String>())
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let mut v = Vocab::new();
        for line in std::fs::read_to_string(path)?.lines() {
            v.add(line);
        }
        Ok(v)
    }
}

impl<S: AsRef<str>> FromIterator<S> for Vocab {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        let mut v = Vocab::new();
        for s in iter {
            v.add(s.as_ref());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_words_share_a_row() {
        let v: Vocab = ["how", "many"].into_iter().collect();
        assert_eq!(v.len(), 3);
        assert_eq!(v.id("many"), 2);
        assert_eq!(v.id("zebra"), 0);
        assert_eq!(v.id("yak"), 0);
        let dir = tempfile::tempdir().unwrap();
        v.save(&dir.path().join("v.txt")).unwrap();
        assert_eq!(Vocab::load(&dir.path().join("v.txt")).unwrap(), v);
    }
}
