#include "qprobe/sprinkler.hpp"

namespace qprobe::sprinkler {

namespace {

const std::vector<std::string> kLabels{"Season", "Sprinkler", "Rain", "Wet", "Slippery"};

Cpd make_cpd(Node node, std::vector<Node> parents, std::initializer_list<double> table) {
    Cpd cpd;
    cpd.node = node;
    cpd.parents = std::move(parents);
    cpd.table = Eigen::Map<const Eigen::VectorXd>(table.begin(), static_cast<Eigen::Index>(table.size()));
    return cpd;
}

} // namespace

Cbn network() {
    Dag g(kLabels, std::vector<Edge>{{kSeason, kSprinkler}, {kSeason, kRain}, {kSprinkler, kWet}, {kRain, kWet}, {kWet, kSlippery}});
    std::vector<Cpd> cpds{
        make_cpd(kSeason, {}, {0.5}),
        make_cpd(kSprinkler, {kSeason}, {0.2, 0.6}),
        make_cpd(kRain, {kSeason}, {0.7, 0.3}),
        make_cpd(kWet, {kSprinkler, kRain}, {0.05, 0.8, 0.85, 0.95}),
        make_cpd(kSlippery, {kWet}, {0.05, 0.85}),
    };
    return Cbn(std::move(g), std::move(cpds));
}

RawDataset raw_observations(std::size_t kept_rows, Rng& rng) {
    static const char* const kSeasons[] = {"Winter", "Spring", "Summer", "Autumn"};
    const Cbn winter = mutilate(network(), kSeason, 0);
    const Cbn spring = mutilate(network(), kSeason, 1);
    RawDataset raw;
    raw.columns = kLabels;
    std::size_t kept = 0;
    while (kept < kept_rows) {
        const std::size_t season = rng.index(4);
        // Summer and autumn rows reuse the spring mechanism; they never survive preprocessing.
        const BinaryDataset row = sample(season == 0 ? winter : spring, 1, rng);
        std::vector<std::string> cells{kSeasons[season]};
        for (std::size_t c = 1; c < row.cols(); ++c) {
            cells.emplace_back(row(0, c) ? "1" : "0");
        }
        raw.rows.push_back(std::move(cells));
        kept += season < 2 ? 1 : 0;
    }
    return raw;
}

KnowledgeSpec knowledge() {
    KnowledgeSpec k;
    for (const auto& other : kLabels) {
        if (other != "Slippery") {
            k.forbidden.push_back({"Slippery", other});
        }
        if (other != "Season" && other != "Slippery") {
            k.forbidden.push_back({other, "Season"});
        }
    }
    k.forbidden.push_back({"Sprinkler", "Rain"});
    k.forbidden.push_back({"Season", "Wet"});
    k.required.push_back({"Sprinkler", "Wet"});
    k.required.push_back({"Rain", "Wet"});
    return k;
}

KnowledgeSpec flipped_knowledge() {
    KnowledgeSpec k = knowledge();
    for (auto& e : k.required) {
        std::swap(e.from, e.to);
    }
    for (auto& e : k.forbidden) {
        const bool blanket = e.from == "Slippery" || e.to == "Season";
        if (!blanket) {
            std::swap(e.from, e.to);
        }
    }
    return k;
}

AnalysisConfig config(bool flip_knowledge) {
    AnalysisConfig cfg;
    cfg.preprocessing.push_back(BinarizeStep{"Season", "Winter", "Spring"});
    cfg.knowledge = flip_knowledge ? flipped_knowledge() : knowledge();
    cfg.target = {"Sprinkler", "Slippery"};
    cfg.probes.push_back({"Sprinkler", "Wet", GreaterThan{0.0}});
    cfg.probes.push_back({"Wet", "Slippery", GreaterThan{0.0}});
    return cfg;
}

} // namespace qprobe::sprinkler
