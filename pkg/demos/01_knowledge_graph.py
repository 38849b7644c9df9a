# %% [markdown]
# Building a knowledge graph from concept mentions
#
# Papers, concept mentions and citations are read from plain records. The
# same mentions give two graphs: the cross-domain one shares a concept
# between all domains, the in-domain one keeps a separate copy per domain.

# %%
from kgcite import ConceptType, MentionRecord, build_kg, kg_stats

papers = [
    {"id": "cs-1", "domain": "CS"},
    {"id": "cs-2", "domain": "CS"},
    {"id": "med-1", "domain": "Med"},
]
mentions = [
    MentionRecord("cs-1", "Neural Network", ConceptType.METHOD, "CS"),
    MentionRecord("cs-1", "ImageNet", ConceptType.DATA, "CS"),
    MentionRecord("cs-2", "neural  network", ConceptType.METHOD, "CS"),
    MentionRecord("med-1", "neural network", ConceptType.METHOD, "Med"),
    MentionRecord("med-1", "MRI", ConceptType.DATA, "Med"),
]
citations = [("cs-2", "cs-1"), ("med-1", "cs-1"), ("med-1", "unknown-paper")]

cross = build_kg(papers, mentions, citations, "cross-domain")
inside = build_kg(papers, mentions, citations, "in-domain")

# %%
# "neural network" is one concept across domains, two concepts in-domain.
for kg in (cross, inside):
    print(kg.scoping.value, [(c.id, c.key, c.scope) for c in kg.concepts])

# The edge to a paper outside the graph is dropped and counted.
print("citations kept:", sorted(cross.citations), "dropped:", cross.dropped_citations)

# %%
# Per-domain statistics; concepts linked from several domains count as MIX.
print(kg_stats(cross).to_tsv())
print(kg_stats(inside).to_tsv())
