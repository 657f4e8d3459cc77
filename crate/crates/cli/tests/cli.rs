use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EXAMPLE_HOM: &str = "\
hom W=2 states=3
start 0
accept 2
class 0 0 1 2
class 1 2
class 2 1
edge 0 1
edge 0 2
edge 1 2
";

const EXAMPLE_NFA: &str = "\
# a=0 b=1 c=2 d=3
nfa W=2 states=3 start=0
accept 2
trans 0 2 1
trans 0 1 2
trans 1 1 2
";

fn cimsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cimsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: impl AsRef<[u8]>) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn compile_automaton(ws: &Workspace, text: &str, image: &str) -> PathBuf {
    let src = ws.file(&format!("{image}.txt"), text);
    let out = ws.path(image);
    let o = cimsim(&["compile", "--automaton", s(&src), "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn worked_example_runs() {
    let ws = Workspace::new();
    let img = compile_automaton(&ws, EXAMPLE_HOM, "example.img");

    let o = cimsim(&["run", s(&img), s(&ws.file("b.in", [1u8])), "--backend", "rram"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[1], "true,true,1,1,rram,104e-12,6.27e-15,3");

    let o = cimsim(&["run", s(&img), s(&ws.file("d.in", [3u8]))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("false,false,,1,functional"));

    let o = cimsim(&["run", s(&img), s(&ws.file("bc.in", [1u8, 2])), "--backend", "sram"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",2,sram,322e-12,30.96e-15,6"));
}

#[test]
fn trace_lists_every_step() {
    let ws = Workspace::new();
    let img = compile_automaton(&ws, EXAMPLE_HOM, "example.img");
    let o = cimsim(&["run", s(&img), s(&ws.file("cb.in", [2u8, 1])), "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let trace: Vec<&str> = out.lines().skip(2).collect();
    assert_eq!(
        trace,
        ["step,symbol,active,accepting", "0,,100,false", "1,2,010,false", "2,1,001,true"]
    );
}

#[test]
fn empty_input_accepts_only_accepting_starts() {
    let ws = Workspace::new();
    let img = compile_automaton(&ws, EXAMPLE_HOM, "example.img");
    let empty = ws.file("empty.in", []);
    assert_eq!(cimsim(&["run", s(&img), s(&empty)]).status.code(), Some(1));

    let nullable = ws.path("star.img");
    let o = cimsim(&["compile", "--regex", "a*", "-o", s(&nullable)]);
    assert!(o.status.success());
    assert_eq!(cimsim(&["run", s(&nullable), s(&empty)]).status.code(), Some(0));
}

#[test]
fn nfa_file_reproduces_routing_and_accept() {
    let ws = Workspace::new();
    let img = compile_automaton(&ws, EXAMPLE_NFA, "nfa.img");
    let o = cimsim(&["dump", s(&img), "--matrices"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for line in ["# R[0] 011", "# R[1] 001", "# R[2] 000", "# c 001", "# V[1] 001", "# V[2] 010"] {
        assert!(out.lines().any(|l| l == line), "missing {line} in\n{out}");
    }
}

#[test]
fn hom_file_reproduces_symbol_matrix() {
    let ws = Workspace::new();
    let img = compile_automaton(&ws, EXAMPLE_HOM, "example.img");
    let out = stdout(&cimsim(&["dump", s(&img), "--matrices"]));
    for line in ["# V[0] 100", "# V[1] 101", "# V[2] 110", "# V[3] 000", "# R[0] 011", "# c 001"] {
        assert!(out.lines().any(|l| l == line), "missing {line}");
    }
}

#[test]
fn regex_compile_reports_shape() {
    let ws = Workspace::new();
    let out = ws.path("abcb.img");
    let o = cimsim(&["compile", "--regex", "ab|cb", "-o", s(&out)]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("states,symbol_bits,routing_density,image_bytes"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    // start, a, c and one shared b
    assert_eq!(fields[..2], ["4", "8"]);
    assert_eq!(fields[3].parse::<u64>().unwrap(), fs::metadata(&out).unwrap().len());

    let o = cimsim(&["compile", "--regex", "ab|cb", "--no-merge", "-o", s(&out)]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("5,"));

    let o = cimsim(&["compile", "--regex", "cb", "--letters", "--symbol-bits", "2", "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = cimsim(&["run", s(&out), s(&ws.file("cb.in", [2u8, 1]))]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn syntax_errors_exit_with_two() {
    let ws = Workspace::new();
    let o = cimsim(&["compile", "--regex", "(", "-o", s(&ws.path("x.img"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position 0"), "{}", stderr(&o));
    assert!(!ws.path("x.img").exists());

    let bad = ws.file("bad.txt", "nfa W=2 states=2 start=0\ntrans 0 9 1\n");
    let o = cimsim(&["compile", "--automaton", s(&bad), "-o", s(&ws.path("y.img"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_images_and_inputs_exit_with_two() {
    let ws = Workspace::new();
    let junk = ws.file("junk.img", b"NOPE0000000000000000");
    let input = ws.file("in", b"a");
    let o = cimsim(&["run", s(&junk), s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("magic"));

    let img = compile_automaton(&ws, EXAMPLE_HOM, "example.img");
    let o = cimsim(&["run", s(&img), s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position 0"), "{}", stderr(&o));

    let wide = ws.path("wide.img");
    assert!(cimsim(&["compile", "--regex", "a", "--symbol-bits", "12", "-o", s(&wide)])
        .status
        .success());
    let o = cimsim(&["run", s(&wide), s(&input), "--input-format", "bytes"]);
    assert_eq!(o.status.code(), Some(2));
    let symbols = ws.file("sym.txt", "97\n");
    assert_eq!(cimsim(&["run", s(&wide), s(&symbols)]).status.code(), Some(0));
    let garbage = ws.file("garbage.txt", "97 x");
    assert_eq!(cimsim(&["run", s(&wide), s(&garbage)]).status.code(), Some(2));
}

#[test]
fn all_input_search_reports_any_match() {
    let ws = Workspace::new();
    let img = ws.path("find.img");
    assert!(cimsim(&["compile", "--regex", "needle", "--all-input", "-o", s(&img)])
        .status
        .success());
    let hay = ws.file("hay.txt", b"haystack with a needle inside");
    let o = cimsim(&["run", s(&img), s(&hay)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("true,false,22,29,"));
    let none = ws.file("none.txt", b"just hay");
    assert_eq!(cimsim(&["run", s(&img), s(&none)]).status.code(), Some(1));
}

#[test]
fn dump_recompile_is_a_fixpoint() {
    let ws = Workspace::new();
    let sources = [
        ("hom.img", Some(EXAMPLE_HOM), None),
        ("nfa.img", Some(EXAMPLE_NFA), None),
        ("re.img", None, Some("(a|b)*c[x-z]+")),
    ];
    for (name, text, regex) in sources {
        let first = match (text, regex) {
            (Some(t), _) => compile_automaton(&ws, t, name),
            (_, Some(r)) => {
                let out = ws.path(name);
                assert!(cimsim(&["compile", "--regex", r, "--all-input", "-o", s(&out)]).status.success());
                out
            }
            _ => unreachable!(),
        };
        let dumped = ws.path(&format!("{name}.hom"));
        assert!(cimsim(&["dump", s(&first), "--matrices", "-o", s(&dumped)]).status.success());
        let second = ws.path(&format!("{name}.again"));
        let o = cimsim(&["compile", "--automaton", s(&dumped), "-o", s(&second)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap(), "{name}");
    }
}

#[test]
fn bench_gates_prints_truth_tables() {
    let o = cimsim(&["bench", "gates"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "gate,row_bits,current,output");
    assert_eq!(lines.len(), 13);
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        let ones = f[1].chars().filter(|&c| c == '1').count();
        let expected = match f[0] {
            "OR" => ones > 0,
            "AND" => ones == 2,
            "XOR" => ones == 1,
            g => panic!("unknown gate {g}"),
        };
        assert_eq!(f[3], if expected { "1" } else { "0" }, "{line}");
    }
    assert!(lines.contains(&"OR,00,8e-9,0"));
    assert!(lines.contains(&"AND,11,800e-6,1"));
}

#[test]
fn bench_costs_table() {
    let o = cimsim(&["bench", "costs"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        [
            "backend,discharge_time_s,energy_per_eval_j",
            "rram,104e-12,2.09e-15",
            "sram,161e-12,5.16e-15",
            "rram/sram,0.645963,0.405039",
            "rram_saving,0.354037,0.594961",
        ]
    );
}

#[test]
fn bench_sweep_ratio_band() {
    let o = cimsim(&["bench", "sweep"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 49);
    for row in rows {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[2], 0.7);
        assert!((5.0..=20.0).contains(&f[9]), "{row}");
    }
}

#[test]
fn config_overrides_and_calibrated_profile() {
    let ws = Workspace::new();
    let o = cimsim(&["bench", "calibrate"]);
    assert!(o.status.success());
    let profile = ws.file("profile.cfg", stdout(&o));
    let o = cimsim(&["bench", "costs", "--config", s(&profile)]);
    assert_eq!(stdout(&o), stdout(&cimsim(&["bench", "costs"])));

    let custom = ws.file("custom.cfg", "cost.rram.energy = 1e-15\nsweep.m1 = 0,0.2,0.1\nsweep.m2 = 0\n");
    let o = cimsim(&["bench", "costs", "--config", s(&custom)]);
    assert!(stdout(&o).lines().any(|l| l == "rram,104e-12,1e-15"));
    let o = cimsim(&["bench", "sweep", "--config", s(&custom)]);
    assert_eq!(stdout(&o).lines().count(), 4);

    let out = ws.path("sweep.csv");
    let o = cimsim(&["bench", "sweep", "-o", s(&out)]);
    assert!(o.status.success() && stdout(&o).is_empty());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 50);

    let bad = ws.file("bad.cfg", "device.r_low = 1\nwho.knows = 2\n");
    let o = cimsim(&["bench", "costs", "--config", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(cimsim(&["bench", "nonsense"]).status.code(), Some(2));
    assert_eq!(cimsim(&["compile", "-o", "x"]).status.code(), Some(2));
    assert_eq!(cimsim(&[]).status.code(), Some(2));
}
