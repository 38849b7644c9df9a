# %% [markdown]
# End-to-end command-line run
#
# Writes a synthetic corpus in the input file formats, then runs the four
# subcommands the same way a shell would:
#
#     kgcite ingest   --config run.cfg
#     kgcite query    --config run.cfg --k 5 --embedding EMB P000007
#     kgcite evaluate --config run.cfg
#     kgcite stats    --config run.cfg

# %%
import tempfile
from pathlib import Path

from kgcite.cli import main
from kgcite.synthetic import planted_corpus, write_corpus

work = Path(tempfile.mkdtemp(prefix="kgcite-demo-"))
cfg = str(write_corpus(planted_corpus(300, 1000, 900, seed=3, dense_dim=32), work))
print(Path(cfg).read_text())

# %%
assert main(["ingest", "--config", cfg]) == 0
assert main(["query", "--config", cfg, "--k", "5", "--embedding", "EMB", "P000007"]) == 0
assert main(["evaluate", "--config", cfg]) == 0
assert main(["stats", "--config", cfg]) == 0

# %%
out = work / "out"
print(sorted(p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file()))
print((out / "report.txt").read_text())
print((out / "pair-stats.tsv").read_text())
