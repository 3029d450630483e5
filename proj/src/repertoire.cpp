#include "daqd/repertoire.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace daqd {

void RepertoireParams::validate() const
{
    if (!(distance_threshold > 0.0) || !std::isfinite(distance_threshold))
        throw ConfigError("repertoire.distance_threshold must be > 0");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw ConfigError("repertoire.epsilon must be in [0, 1)");
    if (k == 0)
        throw ConfigError("repertoire.k must be positive");
}

const char* to_string(DiscardReason r)
{
    switch (r) {
    case DiscardReason::SecondNeighborTooClose: return "second_neighbor_too_close";
    case DiscardReason::NoveltyTooLow: return "novelty_too_low";
    case DiscardReason::ReturnTooLow: return "return_too_low";
    case DiscardReason::NoveltyReturnTradeoff: return "novelty_return_tradeoff";
    }
    return "unknown";
}

bool same_decision(const AdditionOutcome& a, const AdditionOutcome& b)
{
    if (a.kind != b.kind || a.reason != b.reason)
        return false;
    if (a.kind == AdditionOutcome::Kind::Discarded)
        return true;
    return a.slot == b.slot;
}

Repertoire::Repertoire(std::size_t descriptor_dim, RepertoireParams params) : dim_(descriptor_dim), params_(params)
{
    if (dim_ == 0)
        throw DimensionError("descriptor dimension must be positive");
    params_.validate();
}

std::span<const double> Repertoire::descriptor(std::size_t slot) const
{
    return {flat_.data() + slot * dim_, dim_};
}

void Repertoire::check_descriptor(std::span<const double> sd) const
{
    if (sd.size() != dim_)
        throw DimensionError("descriptor has dimension " + std::to_string(sd.size()) + ", container expects "
                             + std::to_string(dim_));
}

double Repertoire::novelty(std::span<const double> sd, std::optional<std::size_t> exclude) const
{
    check_descriptor(sd);
    thread_local std::vector<double> dists;
    dists.clear();
    const std::size_t n = entries_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (exclude && *exclude == i)
            continue;
        dists.push_back(euclidean_distance(sd, descriptor(i)));
    }
    if (dists.empty())
        return kEmptyNovelty;
    const std::size_t kk = std::min(params_.k, dists.size());
    std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(kk), dists.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < kk; ++i)
        sum += dists[i];
    return sum / static_cast<double>(kk);
}

NearestTwo Repertoire::nearest_two(std::span<const double> sd) const
{
    check_descriptor(sd);
    NearestTwo out;
    // Strict comparisons keep the older slot on ties.
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const double d = euclidean_distance(sd, descriptor(i));
        if (!out.first || d < out.first->distance) {
            out.second = out.first;
            out.first = NeighborHit{i, d};
        } else if (!out.second || d < out.second->distance) {
            out.second = NeighborHit{i, d};
        }
    }
    return out;
}

AdditionOutcome Repertoire::try_add(RepertoireEntry candidate)
{
    check_descriptor(candidate.descriptor.view());
    require_finite(candidate.descriptor.view(), "candidate descriptor");
    if (!std::isfinite(candidate.ret))
        throw NumericError("candidate return is not finite");

    AdditionOutcome out;
    const NearestTwo nn = nearest_two(candidate.descriptor.view());
    if (nn.first)
        out.d1 = nn.first->distance;
    if (nn.second)
        out.d2 = nn.second->distance;

    const double l = params_.distance_threshold;
    if (!nn.first || nn.first->distance >= l) {
        out.kind = AdditionOutcome::Kind::AddedNew;
        out.slot = entries_.size();
        candidate.id = next_id_++;
        flat_.insert(flat_.end(), candidate.descriptor.values.begin(), candidate.descriptor.values.end());
        entries_.push_back(std::move(candidate));
        return out;
    }

    const std::size_t i1 = nn.first->slot;
    const RepertoireEntry& nearest = entries_[i1];

    out.kind = AdditionOutcome::Kind::Discarded;
    if (nn.second && nn.second->distance < l) {
        out.reason = DiscardReason::SecondNeighborTooClose;
        return out;
    }

    // Both novelties are taken against the container without the nearest neighbour.
    double nov_new = novelty(candidate.descriptor.view(), i1);
    double nov_1 = novelty(descriptor(i1), i1);
    if (std::isinf(nov_new) || std::isinf(nov_1)) {
        // Single-entry container: no reference set, novelty carries no information.
        nov_new = 0.0;
        nov_1 = 0.0;
    }
    out.novelty_new = nov_new;
    out.novelty_nearest = nov_1;

    const double eps = params_.epsilon;
    const double r_new = candidate.ret;
    const double r_1 = nearest.ret;
    if (!(nov_new >= (1.0 - eps) * nov_1)) {
        out.reason = DiscardReason::NoveltyTooLow;
        return out;
    }
    if (!(r_new >= (1.0 - eps) * r_1)) {
        out.reason = DiscardReason::ReturnTooLow;
        return out;
    }
    if (!((nov_new - nov_1) * std::abs(r_1) >= -(r_new - r_1) * std::abs(nov_1))) {
        out.reason = DiscardReason::NoveltyReturnTradeoff;
        return out;
    }

    out.kind = AdditionOutcome::Kind::Replaced;
    out.reason.reset();
    out.slot = i1;
    out.replaced = entries_[i1];
    candidate.id = next_id_++;
    entries_[i1] = std::move(candidate);
    std::copy(entries_[i1].descriptor.values.begin(), entries_[i1].descriptor.values.end(),
              flat_.begin() + static_cast<std::ptrdiff_t>(i1 * dim_));
    return out;
}

double Repertoire::qd_score() const
{
    double s = 0.0;
    for (const auto& e : entries_)
        s += e.ret;
    return s;
}

double Repertoire::mean_return() const
{
    return entries_.empty() ? 0.0 : qd_score() / static_cast<double>(entries_.size());
}

void Repertoire::insert_unchecked(RepertoireEntry entry)
{
    check_descriptor(entry.descriptor.view());
    if (entry.id >= next_id_)
        next_id_ = entry.id + 1;
    else
        entry.id = next_id_++;
    flat_.insert(flat_.end(), entry.descriptor.values.begin(), entry.descriptor.values.end());
    entries_.push_back(std::move(entry));
}

void Repertoire::clear()
{
    entries_.clear();
    flat_.clear();
    next_id_ = 0;
}

void Repertoire::mark_evaluated(std::size_t slot)
{
    entries_.at(slot).evaluated_in_env = true;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_real(double v)
{
    char buf[40];
    const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

void save_repertoire(const Repertoire& rep, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    const std::size_t phi_dim = rep.empty() ? 0 : rep[0].policy.size();
    out << "entry_id";
    for (std::size_t i = 0; i < rep.descriptor_dim(); ++i)
        out << ",sd_" << i;
    out << ",return,disagreement";
    for (std::size_t i = 0; i < phi_dim; ++i)
        out << ",phi_" << i;
    out << '\n';
    for (const auto& e : rep.entries()) {
        if (e.policy.size() != phi_dim)
            throw DimensionError("repertoire entries have mixed genotype lengths");
        out << e.id;
        for (double v : e.descriptor.values)
            out << ',' << format_real(v);
        out << ',' << format_real(e.ret) << ',';
        if (e.disagreement)
            out << format_real(*e.disagreement);
        for (double v : e.policy.values)
            out << ',' << format_real(v);
        out << '\n';
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_real(std::string_view s, std::size_t line)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("malformed number '" + std::string(s) + "'", line);
    return v;
}

} // namespace

Repertoire load_repertoire(const std::filesystem::path& path, RepertoireParams params)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (text.empty())
        throw ParseError("empty repertoire file", 1);

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            // Every record ends with a newline; anything else is a cut-off write.
            throw ParseError("truncated record (missing newline)", lines.size() + 1);
        }
        lines.emplace_back(text.data() + start, nl - start);
        start = nl + 1;
    }

    const auto header = split_commas(lines[0]);
    std::size_t sd_dim = 0;
    while (1 + sd_dim < header.size() && header[1 + sd_dim] == "sd_" + std::to_string(sd_dim))
        ++sd_dim;
    if (header.empty() || header[0] != "entry_id" || sd_dim == 0 || header.size() < 3 + sd_dim
        || header[1 + sd_dim] != "return" || header[2 + sd_dim] != "disagreement")
        throw ParseError("unexpected repertoire header", 1);
    const std::size_t phi_dim = header.size() - 3 - sd_dim;
    for (std::size_t i = 0; i < phi_dim; ++i)
        if (header[3 + sd_dim + i] != "phi_" + std::to_string(i))
            throw ParseError("unexpected column '" + std::string(header[3 + sd_dim + i]) + "'", 1);

    Repertoire rep(sd_dim, params);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto cols = split_commas(lines[li]);
        if (cols.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " columns, found "
                                 + std::to_string(cols.size()),
                             line_no);
        RepertoireEntry e;
        std::uint64_t id = 0;
        const auto idres = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), id);
        if (idres.ec != std::errc() || idres.ptr != cols[0].data() + cols[0].size())
            throw ParseError("malformed entry_id", line_no);
        e.id = id;
        e.descriptor.values.resize(sd_dim);
        for (std::size_t i = 0; i < sd_dim; ++i)
            e.descriptor[i] = parse_real(cols[1 + i], line_no);
        e.ret = parse_real(cols[1 + sd_dim], line_no);
        if (!cols[2 + sd_dim].empty())
            e.disagreement = parse_real(cols[2 + sd_dim], line_no);
        e.evaluated_in_env = !e.disagreement.has_value();
        e.policy.values.resize(phi_dim);
        for (std::size_t i = 0; i < phi_dim; ++i)
            e.policy[i] = parse_real(cols[3 + sd_dim + i], line_no);
        rep.insert_unchecked(std::move(e));
    }
    return rep;
}

} // namespace daqd
