//! Deterministic Git repositories built from in-memory file maps.

use std::collections::BTreeMap;
use std::path::Path;

use git2::{IndexEntry, IndexTime, Oid, Repository, Signature, Time};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{render_class, Method};
use crate::{gen, mutate};

pub struct RepoBuilder {
    repo: Repository,
    files: BTreeMap<String, String>,
    clock: i64,
}

impl RepoBuilder {
    pub fn init(path: &Path) -> Result<Self, git2::Error> {
        let repo = Repository::init(path)?;
        Ok(RepoBuilder { repo, files: BTreeMap::new(), clock: 1_600_000_000 })
    }

    pub fn repo(&self) -> &Repository {
        &self.repo
    }

    pub fn write(&mut self, path: &str, content: impl Into<String>) -> &mut Self {
        self.files.insert(path.to_string(), content.into());
        self
    }

    pub fn remove(&mut self, path: &str) -> &mut Self {
        self.files.remove(path);
        self
    }

    pub fn files(&self) -> &BTreeMap<String, String> {
        &self.files
    }

    fn tree(&self) -> Result<Oid, git2::Error> {
        let mut index = self.repo.index()?;
        index.clear()?;
        for (path, content) in &self.files {
            let entry = IndexEntry {
                ctime: IndexTime::new(0, 0),
                mtime: IndexTime::new(0, 0),
                dev: 0,
                ino: 0,
                mode: 0o100644,
                uid: 0,
                gid: 0,
                file_size: content.len() as u32,
                id: Oid::zero(),
                flags: 0,
                flags_extended: 0,
                path: path.as_bytes().to_vec(),
            };
            index.add_frombuffer(&entry, content.as_bytes())?;
        }
        index.write_tree()
    }

    fn signature(&mut self) -> Result<Signature<'static>, git2::Error> {
        self.clock += 60;
        Signature::new("Dev", "dev@example.com", &Time::new(self.clock, 0))
    }

    /// Commits the current file map on top of HEAD.
    pub fn commit(&mut self, message: &str) -> Result<Oid, git2::Error> {
        let parent = self.repo.head().ok().and_then(|h| h.target());
        self.commit_with(message, Some("HEAD"), parent.into_iter().collect())
    }

    /// Commits the current file map with HEAD and `other` as parents.
    pub fn merge(&mut self, message: &str, other: Oid) -> Result<Oid, git2::Error> {
        let head = self.repo.head()?.peel_to_commit()?.id();
        self.commit_with(message, Some("HEAD"), vec![head, other])
    }

    /// Creates a commit on a side line starting at `base`, without moving HEAD.
    pub fn side_commit(&mut self, message: &str, base: Oid) -> Result<Oid, git2::Error> {
        self.commit_with(message, None, vec![base])
    }

    fn commit_with(
        &mut self,
        message: &str,
        update_ref: Option<&str>,
        parents: Vec<Oid>,
    ) -> Result<Oid, git2::Error> {
        let sig = self.signature()?;
        let tree = self.repo.find_tree(self.tree()?)?;
        let parents = parents
            .into_iter()
            .map(|p| self.repo.find_commit(p))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&git2::Commit<'_>> = parents.iter().collect();
        self.repo.commit(update_ref, &sig, &sig, message, &tree, &refs)
    }
}

/// Builds a linear history of `commits` commits over a handful of classes.
/// Most commits mutate one to three existing methods; some add or delete
/// methods. The result depends only on `seed`.
pub fn synthetic_history(path: &Path, commits: usize, seed: u64) -> Result<(), git2::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = RepoBuilder::init(path)?;
    let class_count = 12;
    let mut classes: Vec<Vec<Method>> = (0..class_count)
        .map(|c| (0..4).map(|i| gen::method(&mut rng, &format!("op{c}x{i}"))).collect())
        .collect();
    let mut next_method = 0usize;
    let flush = |builder: &mut RepoBuilder, classes: &[Vec<Method>]| {
        for (c, methods) in classes.iter().enumerate() {
            let name = format!("Service{c}");
            builder.write(
                &format!("src/main/java/org/example/{name}.java"),
                render_class("org.example", &name, methods),
            );
        }
    };
    flush(&mut builder, &classes);
    builder.commit("Initial import")?;
    for n in 1..commits {
        let roll = rng.gen_range(0..100);
        let c = rng.gen_range(0..class_count);
        if roll < 6 {
            next_method += 1;
            let m = gen::method(&mut rng, &format!("added{next_method}"));
            classes[c].push(m);
        } else if roll < 8 && classes[c].len() > 2 {
            let i = rng.gen_range(0..classes[c].len());
            classes[c].remove(i);
        } else {
            let touched = rng.gen_range(1..=3);
            for _ in 0..touched {
                let c = *[c, rng.gen_range(0..class_count)].choose(&mut rng).unwrap();
                if classes[c].is_empty() {
                    continue;
                }
                let i = rng.gen_range(0..classes[c].len());
                let (m, _) = mutate::mutate(&classes[c][i], 0.65, &mut rng);
                // Keep methods from growing without bound over long histories.
                if m.render().lines().count() < 80 {
                    classes[c][i] = m;
                }
            }
        }
        flush(&mut builder, &classes);
        builder.commit(&format!("Change {n}"))?;
    }
    Ok(())
}
