//! Seeded agreement runs of the spectral deciders against the oracle.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::equation::Instance;
use crate::families::{gsylv_grid, star_grid};
use crate::random::seeded_rng;
use crate::report::{
    analyze, AnalyzeOptions, CategoryCount, Command, FirstDisagreement, InstanceFile, ReportFile,
    StarTag, SuiteSummary,
};

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub max_dim: usize,
    pub count: usize,
    pub options: AnalyzeOptions,
    /// Worker threads; `0` picks the available parallelism.
    pub threads: usize,
}

impl SuiteConfig {
    pub fn new(seed: u64, max_dim: usize, count: usize) -> Self {
        Self {
            seed,
            max_dim,
            count,
            options: AnalyzeOptions::default(),
            threads: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub index: usize,
    /// Equation, `⋆` where present, and generating family.
    pub category: String,
    pub instance: Instance,
}

/// Every size pattern up to `max_dim` for both equations and both `⋆`,
/// the structured families and the table rows, shuffled by `seed` and cut
/// to `count`. Patterns are padded with extra instances when `count` is
/// larger than the grid.
pub fn suite_cases(seed: u64, max_dim: usize, count: usize) -> Vec<SuiteCase> {
    if count == 0 || max_dim == 0 {
        return Vec::new();
    }
    let mut rng = seeded_rng(seed);
    let half = count.div_ceil(2);
    let mut all: Vec<(String, Instance)> = star_grid(max_dim, half, &mut rng)
        .into_iter()
        .map(|(fam, i)| {
            (
                format!("star_sylvester/{:?}/{fam:?}", StarTag::from(i.star())),
                Instance::Star(i),
            )
        })
        .collect();
    all.extend(
        gsylv_grid(max_dim, half, &mut rng)
            .into_iter()
            .map(|(fam, i)| (format!("gen_sylvester/{fam:?}"), Instance::GSylv(i))),
    );
    all.shuffle(&mut rng);
    all.truncate(count);
    all.into_iter()
        .enumerate()
        .map(|(index, (category, instance))| SuiteCase {
            index,
            category,
            instance,
        })
        .collect()
}

struct CaseResult {
    agree: bool,
    ur: Option<bool>,
}

fn run_case(case: &SuiteCase, opts: &AnalyzeOptions) -> CaseResult {
    let report = analyze(&case.instance, opts);
    CaseResult {
        agree: report.agreed(),
        ur: report.decisions.as_ref().and_then(|d| d.ur.value()),
    }
}

/// Results in instance order regardless of how the work was split.
fn run_all(cases: &[SuiteCase], opts: &AnalyzeOptions, threads: usize) -> Vec<CaseResult> {
    let threads = match threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(cases.len())
    .max(1);
    let chunk = cases.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|c| run_case(c, opts)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("suite worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: ReportFile,
    /// The first disagreeing instance, ready to be written to disk.
    pub reproducer: Option<InstanceFile>,
}

impl SuiteOutcome {
    pub fn all_agree(&self) -> bool {
        self.reproducer.is_none()
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteOutcome {
    let cases = suite_cases(cfg.seed, cfg.max_dim, cfg.count);
    let results = run_all(&cases, &cfg.options, cfg.threads);
    let mut categories: BTreeMap<String, CategoryCount> = BTreeMap::new();
    for (case, res) in cases.iter().zip(&results) {
        let entry = categories
            .entry(case.category.clone())
            .or_insert_with(|| CategoryCount {
                category: case.category.clone(),
                total: 0,
                agree: 0,
                ur_true: 0,
            });
        entry.total += 1;
        entry.agree += res.agree as usize;
        entry.ur_true += (res.ur == Some(true)) as usize;
    }
    let first = cases
        .iter()
        .zip(&results)
        .find(|(_, r)| !r.agree)
        .map(|(c, _)| c);
    let reproducer = first.map(|c| {
        let mut file = InstanceFile::from_instance(&c.instance);
        file.seed = Some(cfg.seed);
        file.note = Some(format!(
            "suite instance {} of {} ({}), max_dim {}",
            c.index, cfg.count, c.category, cfg.max_dim
        ));
        file
    });
    let first_disagreement = first.zip(reproducer.as_ref()).map(|(c, file)| {
        let mut report = analyze(&c.instance, &cfg.options);
        report.seed = Some(cfg.seed);
        Box::new(FirstDisagreement {
            index: c.index,
            category: c.category.clone(),
            instance: file.clone(),
            report,
        })
    });
    let mut report = ReportFile::new(Command::Suite, &cfg.options.tol);
    report.seed = Some(cfg.seed);
    report.backend = Some(cfg.options.backend);
    if let Some(f) = &first_disagreement {
        report.disagreements = f.report.disagreements.clone();
    }
    report.suite = Some(SuiteSummary {
        max_dim: cfg.max_dim,
        count: cases.len(),
        agree: results.iter().filter(|r| r.agree).count(),
        categories: categories.into_values().collect(),
        first_disagreement,
        reproducer: None,
    });
    SuiteOutcome { report, reproducer }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{Deciders, Fault};

    #[test]
    fn empty_suite_is_vacuous() {
        let out = run_suite(&SuiteConfig::new(1, 4, 0));
        assert!(out.all_agree());
        assert_eq!(out.report.suite.unwrap().headline(), "0/0 agree");
    }

    #[test]
    fn cases_are_reproducible() {
        let a = suite_cases(9, 3, 40);
        let b = suite_cases(9, 3, 40);
        assert_eq!(a.len(), 40);
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.instance == y.instance && x.category == y.category));
        assert!(a.iter().any(|c| matches!(c.instance, Instance::Star(_))));
        assert!(a.iter().any(|c| matches!(c.instance, Instance::GSylv(_))));
    }

    #[test]
    fn thread_count_does_not_change_the_outcome() {
        let mut one = SuiteConfig::new(5, 3, 30);
        one.threads = 1;
        let mut many = one;
        many.threads = 4;
        assert_eq!(run_suite(&one).report, run_suite(&many).report);
    }

    #[test]
    fn injected_fault_yields_a_reproducer() {
        let mut cfg = SuiteConfig::new(3, 3, 60);
        cfg.options.deciders = Deciders::with_fault(Some(Fault::GSylvSrNegated));
        let out = run_suite(&cfg);
        let file = out.reproducer.expect("a disagreement");
        let (_, inst) = InstanceFile::parse(&file.to_json()).unwrap();
        let again = analyze(&inst, &cfg.options);
        let first = out.report.suite.unwrap().first_disagreement.unwrap();
        assert_eq!(
            again.decisions.unwrap().booleans(),
            first.report.decisions.unwrap().booleans()
        );
    }
}
