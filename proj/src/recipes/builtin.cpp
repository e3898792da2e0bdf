#include <algorithm>
#include <cctype>

#include "wfforge/recipes.hpp"

namespace wfforge::recipes {

namespace {

using Link = std::pair<const char*, const char*>;

// Nodes are "id:category"; a bare id is its own category.
TypedDag dag(std::initializer_list<const char*> nodes, std::initializer_list<Link> edges) {
    TypedDag g;
    for (std::string n : nodes) {
        const auto colon = n.find(':');
        if (colon == std::string::npos) {
            g.nodes.push_back({n, n});
        } else {
            g.nodes.push_back({n.substr(0, colon), n.substr(colon + 1)});
        }
    }
    for (auto [a, b] : edges) g.edges.emplace_back(*g.index_of(a), *g.index_of(b));
    return g;
}

Pattern pattern(const char* name, const TypedDag& base, TypedDag graph, std::initializer_list<Link> in,
                std::initializer_list<Link> out) {
    Pattern p{name, std::move(graph), {}, {}};
    for (auto [b, n] : in) p.attach_in.emplace_back(*base.index_of(b), *p.graph.index_of(n));
    for (auto [n, b] : out) p.attach_out.emplace_back(*p.graph.index_of(n), *base.index_of(b));
    return p;
}

// Shallow and highly parallel: one split, many independent searches, two merges.
Recipe blast() {
    Recipe r;
    r.name = "blast";
    r.base_graph = dag({"split:split_fasta", "search0:blastall", "search1:blastall", "cat_blast", "cat"},
                       {{"split", "search0"}, {"split", "search1"}, {"search0", "cat_blast"},
                        {"search1", "cat_blast"}, {"search0", "cat"}, {"search1", "cat"}});
    r.patterns.push_back(pattern("search", r.base_graph, dag({"s:blastall"}, {}), {{"split", "s"}},
                                 {{"s", "cat_blast"}, {"s", "cat"}}));
    return r;
}

// Independent crop simulations, each a short two-branch pipeline, summarised at the end.
Recipe cycles() {
    Recipe r;
    r.name = "cycles";
    r.base_graph = dag({"baseline:baseline_cycles", "sim:cycles", "fert:fertilizer_increase_cycles",
                        "parse:cycles_output_parser", "fparse:fertilizer_increase_output_parser",
                        "summary:cycles_output_summary", "fsummary:fertilizer_increase_output_summary",
                        "plots:cycles_plots"},
                       {{"baseline", "sim"}, {"baseline", "fert"}, {"sim", "parse"}, {"fert", "fparse"},
                        {"parse", "summary"}, {"fparse", "fsummary"}, {"summary", "plots"}, {"fsummary", "plots"}});
    r.patterns.push_back(pattern(
        "simulation", r.base_graph,
        dag({"baseline:baseline_cycles", "sim:cycles", "fert:fertilizer_increase_cycles",
             "parse:cycles_output_parser", "fparse:fertilizer_increase_output_parser"},
            {{"baseline", "sim"}, {"baseline", "fert"}, {"sim", "parse"}, {"fert", "fparse"}}),
        {}, {{"parse", "summary"}, {"fparse", "fsummary"}}));
    return r;
}

// Fan-out into four-stage lane pipelines, fan-in, then a short serial tail.
Recipe epigenomics() {
    Recipe r;
    r.name = "epigenomics";
    r.base_graph = dag({"split:fastqSplit", "filter:filterContams", "s2s:sol2sanger", "bfq:fast2bfq", "map",
                        "merge:mapMerge", "index:maqIndex", "pileup"},
                       {{"split", "filter"}, {"filter", "s2s"}, {"s2s", "bfq"}, {"bfq", "map"}, {"map", "merge"},
                        {"merge", "index"}, {"index", "pileup"}});
    r.patterns.push_back(pattern("lane", r.base_graph,
                                 dag({"filter:filterContams", "s2s:sol2sanger", "bfq:fast2bfq", "map"},
                                     {{"filter", "s2s"}, {"s2s", "bfq"}, {"bfq", "map"}}),
                                 {{"split", "filter"}}, {{"map", "merge"}}));
    return r;
}

// Image reprojection, pairwise difference fitting, global background model,
// per-image correction, then a serial mosaic tail.
Recipe montage() {
    Recipe r;
    r.name = "montage";
    r.base_graph = dag({"proj0:mProject", "proj1:mProject", "diff0:mDiffFit", "concat:mConcatFit",
                        "bgmodel:mBgModel", "bg0:mBackground", "bg1:mBackground", "imgtbl:mImgtbl", "add:mAdd",
                        "viewer:mViewer"},
                       {{"proj0", "diff0"}, {"proj1", "diff0"}, {"diff0", "concat"}, {"concat", "bgmodel"},
                        {"proj0", "bg0"}, {"proj1", "bg1"}, {"bgmodel", "bg0"}, {"bgmodel", "bg1"},
                        {"bg0", "imgtbl"}, {"bg1", "imgtbl"}, {"bg0", "add"}, {"bg1", "add"}, {"imgtbl", "add"},
                        {"add", "viewer"}});
    r.patterns.push_back(pattern("image", r.base_graph,
                                 dag({"proj:mProject", "diff:mDiffFit", "bg:mBackground"},
                                     {{"proj", "diff"}, {"proj", "bg"}}),
                                 {{"proj0", "diff"}, {"bgmodel", "bg"}},
                                 {{"diff", "concat"}, {"bg", "imgtbl"}, {"bg", "add"}}));
    return r;
}

// Deep per-sample pipelines joined by joint genotyping and a filtering tail.
Recipe soykb() {
    Recipe r;
    r.name = "soykb";
    r.base_graph = dag({"align:alignment_to_reference", "sort:sort_sam", "dedup", "replace:add_replace",
                        "target:realign_target_creator", "realign:indel_realign", "haplo:haplotype_caller",
                        "genotype:genotype_gvcfs", "combine:combine_variants", "snp:select_variants_snp",
                        "indel:select_variants_indel", "fsnp:filtering_snp", "findel:filtering_indel",
                        "merge:merge_gcvf"},
                       {{"align", "sort"}, {"sort", "dedup"}, {"dedup", "replace"}, {"replace", "target"},
                        {"target", "realign"}, {"realign", "haplo"}, {"haplo", "genotype"},
                        {"genotype", "combine"}, {"combine", "snp"}, {"combine", "indel"}, {"snp", "fsnp"},
                        {"indel", "findel"}, {"fsnp", "merge"}, {"findel", "merge"}});
    r.patterns.push_back(pattern(
        "sample", r.base_graph,
        dag({"align:alignment_to_reference", "sort:sort_sam", "dedup", "replace:add_replace",
             "target:realign_target_creator", "realign:indel_realign", "haplo:haplotype_caller"},
            {{"align", "sort"}, {"sort", "dedup"}, {"dedup", "replace"}, {"replace", "target"},
             {"target", "realign"}, {"realign", "haplo"}}),
        {}, {{"haplo", "genotype"}}));
    return r;
}

} // namespace

std::vector<std::string> builtin_recipe_names() {
    return {"blast", "cycles", "epigenomics", "montage", "soykb"};
}

Recipe builtin_recipe(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "blast") return blast();
    if (lower == "cycles") return cycles();
    if (lower == "epigenomics") return epigenomics();
    if (lower == "montage") return montage();
    if (lower == "soykb") return soykb();
    throw InvalidArgument("unknown recipe " + std::string(name));
}

} // namespace wfforge::recipes
