#include "lergo/cli.hpp"

#include "lergo/dynamics.hpp"
#include "lergo/ergotropy.hpp"
#include "lergo/oracle.hpp"
#include "lergo/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <locale>
#include <map>
#include <sstream>

namespace lergo::cli {

using ojson = nlohmann::ordered_json;

namespace {

constexpr int kDefaultL = 11;

class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double parse_double(const std::string& text, const std::string& what)
{
    std::string t = text;
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    std::string lower = t;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "+inf" || lower == "infinity")
        return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t[0] == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("cannot parse " + what + " value '" + text + "'");
    return v;
}

int parse_int(const std::string& text, const std::string& what)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ConfigError("cannot parse " + what + " value '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        parts.push_back(cur);
    if (!s.empty() && s.back() == sep)
        parts.emplace_back();
    return parts;
}

std::vector<cplx> read_amplitude_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open amplitude file '" + path + "'");
    std::vector<cplx> f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        ls.imbue(std::locale::classic());
        std::string re, im, extra;
        if (!(ls >> re))
            continue;
        if (!(ls >> im) || (ls >> extra))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 're im'");
        f.emplace_back(parse_double(re, "amplitude"), parse_double(im, "amplitude"));
    }
    if (f.empty())
        throw ConfigError("amplitude file '" + path + "' holds no amplitudes");
    return f;
}

// State inputs of a single configuration layer.
struct StateInputs {
    std::optional<int> ell, l1, l2;
    std::optional<double> phi21;
    std::vector<std::string> winding;
    std::optional<std::string> bell;
    std::optional<std::string> amplitudes;

    bool any() const { return ell || l1 || l2 || phi21 || !winding.empty() || bell || amplitudes; }
};

StateSpec resolve_state(const StateInputs& in)
{
    int kinds = 0;
    kinds += in.ell ? 1 : 0;
    kinds += (in.l1 || in.l2 || in.phi21) ? 1 : 0;
    kinds += in.winding.empty() ? 0 : 1;
    kinds += in.bell ? 1 : 0;
    kinds += in.amplitudes ? 1 : 0;
    if (kinds != 1)
        throw ConfigError("exactly one state spec is required (ell, l1/l2, winding, bell or amplitudes)");

    if (in.ell)
        return CurrentSpec{*in.ell};
    if (in.l1 || in.l2 || in.phi21) {
        if (!in.l1 || !in.l2)
            throw ConfigError("two-current state needs both l1 and l2");
        return SuperpositionSpec{WindingSet{{{*in.l1, 0.0}, {*in.l2, in.phi21.value_or(0.0)}}}};
    }
    if (!in.winding.empty()) {
        WindingSet w;
        for (const auto& entry : in.winding) {
            const auto parts = split(entry, ':');
            if (parts.empty() || parts.size() > 2)
                throw ConfigError("winding entries are 'ell' or 'ell:phi', got '" + entry + "'");
            w.entries.push_back({parse_int(parts[0], "winding"), parts.size() == 2 ? parse_double(parts[1], "phase") : 0.0});
        }
        return SuperpositionSpec{w};
    }
    if (in.bell) {
        const auto parts = split(*in.bell, ',');
        if (parts.size() != 2)
            throw ConfigError("bell expects 'i,j', got '" + *in.bell + "'");
        return BellSpec{parse_int(parts[0], "bell"), parse_int(parts[1], "bell")};
    }
    return AmplitudeSpec{*in.amplitudes, read_amplitude_file(*in.amplitudes)};
}

Command parse_command(const std::string& s)
{
    static const std::map<std::string, Command> names{{"distribution", Command::Distribution},
                                                      {"sweep", Command::Sweep},
                                                      {"dynamics", Command::Dynamics},
                                                      {"verify", Command::Verify}};
    const auto it = names.find(s);
    if (it == names.end())
        throw ConfigError("unknown command '" + s + "'");
    return it->second;
}

std::string command_name(Command c)
{
    switch (c) {
    case Command::Distribution: return "distribution";
    case Command::Sweep: return "sweep";
    case Command::Dynamics: return "dynamics";
    case Command::Verify: return "verify";
    }
    return "?";
}

Format parse_format(const std::string& s)
{
    if (s == "csv")
        return Format::Csv;
    if (s == "json")
        return Format::Json;
    throw ConfigError("format must be csv or json, got '" + s + "'");
}

std::string json_text(const nlohmann::json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned())
        return std::to_string(v.get<long long>());
    if (v.is_number())
        return format_number(v.get<double>());
    throw ConfigError("expected a number or string, got " + v.dump());
}

double json_double(const nlohmann::json& v, const std::string& key)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
        return parse_double(v.get<std::string>(), key);
    throw ConfigError("config key '" + key + "' must be a number");
}

int json_int(const nlohmann::json& v, const std::string& key)
{
    if (v.is_number_integer())
        return v.get<int>();
    throw ConfigError("config key '" + key + "' must be an integer");
}

// Keys accept either '-' or '_' as separator.
std::string normalize_key(std::string k)
{
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
}

ojson number_json(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    const std::string s = format_number(v);
    double r = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), r);
    return r;
}

ojson cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return number_json(*d);
    if (const auto* i = std::get_if<long long>(&c))
        return *i;
    return std::get<std::string>(c);
}

std::string cell_text(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return format_number(*d);
    if (const auto* i = std::get_if<long long>(&c))
        return std::to_string(*i);
    return std::get<std::string>(c);
}

// Numbers in reports go through the same rounding as table cells.
ojson rounded(double v) { return number_json(v); }

std::string state_tag(const StateSpec& s)
{
    if (const auto* c = std::get_if<CurrentSpec>(&s))
        return "l=" + std::to_string(c->ell);
    if (std::holds_alternative<SuperpositionSpec>(s))
        return "superposition";
    if (std::holds_alternative<BellSpec>(s))
        return "bell";
    return "amplitudes";
}

PureState1x make_state(const StateSpec& spec, int L, std::ostream* warn)
{
    return std::visit(
        [&](const auto& s) -> PureState1x {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CurrentSpec>)
                return current_state(L, s.ell);
            else if constexpr (std::is_same_v<T, SuperpositionSpec>)
                return superposition_state(L, s.windings);
            else if constexpr (std::is_same_v<T, BellSpec>)
                return bell_state(L, s.i, s.j);
            else {
                double n2 = 0.0;
                for (const auto& a : s.raw)
                    n2 += std::norm(a);
                if (warn && std::abs(n2 - 1.0) > 1e-8)
                    *warn << "warning: amplitudes in '" << s.path << "' have squared norm " << format_number(n2)
                          << "; normalized on load\n";
                return PureState1x::normalized(s.raw);
            }
        },
        spec);
}

void require_state(const RunConfig& cfg)
{
    if (!cfg.state)
        throw ConfigError("a state spec is required (--ell, --l1/--l2, --winding, --bell or --amplitudes)");
}

} // namespace

Range Range::parse(const std::string& text)
{
    const auto parts = split(text, ':');
    Range r;
    if (parts.size() == 1) {
        r.start = r.stop = parse_double(parts[0], "range");
        r.step = 1.0;
    } else if (parts.size() == 3) {
        r.start = parse_double(parts[0], "range start");
        r.stop = parse_double(parts[1], "range stop");
        r.step = parse_double(parts[2], "range step");
    } else {
        throw ConfigError("ranges are 'start:stop:step' or a single value, got '" + text + "'");
    }
    if (!std::isfinite(r.start) || !std::isfinite(r.stop) || !(r.step > 0.0) || !std::isfinite(r.step))
        throw ConfigError("range '" + text + "' needs finite bounds and a positive step");
    if (r.stop < r.start)
        throw ConfigError("range '" + text + "' has stop below start");
    return r;
}

std::vector<double> Range::values() const
{
    std::vector<double> v;
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 0.5));
    if (n > 1000000)
        throw ConfigError("range " + str() + " has more than a million points");
    for (long long i = 0; i <= n; ++i)
        v.push_back(start + static_cast<double>(i) * step);
    return v;
}

std::string Range::str() const { return format_number(start) + ":" + format_number(stop) + ":" + format_number(step); }

int RunConfig::sites() const
{
    if (L)
        return *L;
    if (state)
        if (const auto* a = std::get_if<AmplitudeSpec>(&*state))
            return static_cast<int>(a->raw.size());
    return kDefaultL;
}

RingSpec RunConfig::ring(double Jnn) const
{
    if (!alpha) {
        if (g || R)
            throw ConfigError("--g and --R apply to power-law couplings; set --alpha");
        return RingSpec::nearest_neighbor(sites(), Jnn);
    }
    return RingSpec::power_law(sites(), g.value_or(Jnn / 2.0), *alpha, R);
}

void RunConfig::validate() const
{
    const int n = sites();
    if (n < 3)
        throw ConfigError("ring needs at least 3 sites, got L=" + std::to_string(n));
    if (state)
        if (const auto* a = std::get_if<AmplitudeSpec>(&*state); a && static_cast<int>(a->raw.size()) != n)
            throw ConfigError("amplitude file has " + std::to_string(a->raw.size()) + " lines but L=" + std::to_string(n));
    if (!std::isfinite(J) || !std::isfinite(Delta))
        throw ConfigError("J and Delta must be finite");
    try {
        ring().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (S && (*S < 1 || *S > n))
        throw ConfigError("site S must lie in 1.." + std::to_string(n));
    if (J_range && alpha && g)
        throw ConfigError("a J sweep on a power-law ring sets g = J/2; drop --g");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError("dt must be positive");
    if (samples < 1)
        throw ConfigError("samples must be positive");

    switch (command) {
    case Command::Distribution:
        require_state(*this);
        break;
    case Command::Sweep:
        require_state(*this);
        if (!delta_range && !J_range)
            throw ConfigError("sweep needs --Delta-range and/or --J-range");
        if (components && !std::holds_alternative<SuperpositionSpec>(*state))
            throw ConfigError("--components needs a superposition state");
        break;
    case Command::Dynamics:
        require_state(*this);
        if (!t_max)
            throw ConfigError("dynamics needs --t-max");
        if (!(*t_max >= 0.0) || !std::isfinite(*t_max))
            throw ConfigError("t-max must be non-negative");
        if (*t_max / dt > 1e6)
            throw ConfigError("time grid has more than a million points");
        break;
    case Command::Verify:
        break;
    }
    if (state) {
        try {
            make_state(*state, n, nullptr);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid state: ") + e.what());
        }
    }
}

ojson RunConfig::to_json() const
{
    ojson j;
    j["command"] = command_name(command);
    j["L"] = sites();
    j["coupling"] = alpha ? "power_law" : "nearest_neighbor";
    j["J"] = rounded(J);
    if (alpha) {
        const auto spec = std::get<PowerLaw>(ring().coupling);
        j["alpha"] = rounded(spec.alpha);
        j["g"] = rounded(spec.g);
        j["R"] = rounded(spec.R);
    }
    j["Delta"] = rounded(Delta);
    if (state) {
        ojson s;
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, CurrentSpec>) {
                    s["kind"] = "current";
                    s["ell"] = v.ell;
                } else if constexpr (std::is_same_v<T, SuperpositionSpec>) {
                    s["kind"] = "superposition";
                    s["windings"] = ojson::array();
                    for (const auto& w : v.windings.entries)
                        s["windings"].push_back({{"ell", w.ell}, {"phi", rounded(w.phi)}});
                } else if constexpr (std::is_same_v<T, BellSpec>) {
                    s["kind"] = "bell";
                    s["sites"] = {v.i, v.j};
                } else {
                    s["kind"] = "amplitudes";
                    s["path"] = v.path;
                }
            },
            *state);
        j["state"] = s;
    }
    if (delta_range)
        j["Delta_range"] = delta_range->str();
    if (J_range)
        j["J_range"] = J_range->str();
    if (t_max)
        j["t_max"] = rounded(*t_max);
    j["dt"] = rounded(dt);
    if (S)
        j["S"] = *S;
    j["components"] = components;
    j["seed"] = seed;
    j["samples"] = samples;
    return j;
}

void apply_json(RunConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object())
        throw ConfigError("config file must hold a JSON object");
    StateInputs st;
    try {
        for (const auto& [raw_key, v] : j.items()) {
            const std::string key = normalize_key(raw_key);
            if (key == "command")
                cfg.command = parse_command(v.get<std::string>());
            else if (key == "L")
                cfg.L = json_int(v, key);
            else if (key == "J")
                cfg.J = json_double(v, key);
            else if (key == "alpha")
                cfg.alpha = json_double(v, key);
            else if (key == "R")
                cfg.R = json_double(v, key);
            else if (key == "g")
                cfg.g = json_double(v, key);
            else if (key == "Delta")
                cfg.Delta = json_double(v, key);
            else if (key == "ell")
                st.ell = json_int(v, key);
            else if (key == "l1")
                st.l1 = json_int(v, key);
            else if (key == "l2")
                st.l2 = json_int(v, key);
            else if (key == "phi21")
                st.phi21 = json_double(v, key);
            else if (key == "winding") {
                if (!v.is_array())
                    throw ConfigError("winding must be an array");
                for (const auto& w : v) {
                    if (w.is_array() && w.size() == 2)
                        st.winding.push_back(json_text(w[0]) + ":" + json_text(w[1]));
                    else
                        st.winding.push_back(json_text(w));
                }
            } else if (key == "bell") {
                if (v.is_array() && v.size() == 2)
                    st.bell = json_text(v[0]) + "," + json_text(v[1]);
                else
                    st.bell = json_text(v);
            } else if (key == "amplitudes")
                st.amplitudes = v.get<std::string>();
            else if (key == "t-max")
                cfg.t_max = json_double(v, key);
            else if (key == "dt")
                cfg.dt = json_double(v, key);
            else if (key == "S")
                cfg.S = json_int(v, key);
            else if (key == "Delta-range")
                cfg.delta_range = Range::parse(json_text(v));
            else if (key == "J-range")
                cfg.J_range = Range::parse(json_text(v));
            else if (key == "components")
                cfg.components = v.get<bool>();
            else if (key == "format")
                cfg.format = parse_format(v.get<std::string>());
            else if (key == "output")
                cfg.output = v.get<std::string>();
            else if (key == "seed")
                cfg.seed = v.get<std::uint64_t>();
            else if (key == "samples")
                cfg.samples = json_int(v, key);
            else
                throw ConfigError("unknown config key '" + raw_key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config value has the wrong type: ") + e.what());
    }
    if (st.any())
        cfg.state = resolve_state(st);
}

RunConfig parse_command_line(int argc, const char* const* argv)
{
    CLI::App app{"Local ergotropy of one-excitation states on XY spin rings"};
    app.set_help_flag("-h,--help", "Print this help message and exit");

    std::string command;
    std::optional<std::string> config_path, L, J, alpha, R, g, Delta, l1, l2, phi21, ell, bell, amplitudes, t_max, dt, S,
        delta_range, J_range, format, output, seed, samples;
    std::vector<std::string> winding;
    bool components = false;

    app.add_option("command", command, "distribution | sweep | dynamics | verify")->required();
    app.add_option("--config", config_path, "JSON file with flag-named keys; explicit flags win");
    app.add_option("--L", L, "number of sites");
    app.add_option("--J", J, "nearest-neighbour coupling");
    app.add_option("--Delta", Delta, "longitudinal field");
    app.add_option("--alpha", alpha, "power-law exponent (number or inf); selects the long-range ring");
    app.add_option("--R", R, "ring radius for the power law (default: unit nearest spacing)");
    app.add_option("--g", g, "power-law strength (default J/2)");
    app.add_option("--l1", l1, "first winding of a two-current state");
    app.add_option("--l2", l2, "second winding of a two-current state");
    app.add_option("--phi21", phi21, "relative phase of the two-current state (radians)");
    app.add_option("--ell", ell, "single current state");
    app.add_option("--winding", winding, "superposition component ell[:phi], repeatable")->take_all();
    app.add_option("--bell", bell, "Bell pair i,j");
    app.add_option("--amplitudes", amplitudes, "file of 're im' lines, one per site");
    app.add_option("--t-max", t_max, "final time of the dynamics grid");
    app.add_option("--dt", dt, "time step (default 0.01)");
    app.add_option("--S", S, "site for convexity (sweep, default L) or period (dynamics, default 1)");
    app.add_option("--Delta-range", delta_range, "start:stop:step");
    app.add_option("--J-range", J_range, "start:stop:step");
    app.add_flag("--components", components, "sweep: also emit each component current state");
    app.add_option("--format", format, "csv or json");
    app.add_option("--output", output, "output file (default stdout)");
    app.add_option("--seed", seed, "seed of the random-state suites");
    app.add_option("--samples", samples, "number of random states in the oracle suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    }

    RunConfig cfg;
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in)
            throw ConfigError("cannot open config file '" + *config_path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
        apply_json(cfg, j);
    }

    cfg.command = parse_command(command);
    if (L)
        cfg.L = parse_int(*L, "L");
    if (J)
        cfg.J = parse_double(*J, "J");
    if (Delta)
        cfg.Delta = parse_double(*Delta, "Delta");
    if (alpha)
        cfg.alpha = parse_double(*alpha, "alpha");
    if (R)
        cfg.R = parse_double(*R, "R");
    if (g)
        cfg.g = parse_double(*g, "g");
    if (t_max)
        cfg.t_max = parse_double(*t_max, "t-max");
    if (dt)
        cfg.dt = parse_double(*dt, "dt");
    if (S)
        cfg.S = parse_int(*S, "S");
    if (delta_range)
        cfg.delta_range = Range::parse(*delta_range);
    if (J_range)
        cfg.J_range = Range::parse(*J_range);
    if (components)
        cfg.components = true;
    if (format)
        cfg.format = parse_format(*format);
    if (output)
        cfg.output = *output;
    if (seed) {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(seed->data(), seed->data() + seed->size(), v);
        if (ec != std::errc() || ptr != seed->data() + seed->size())
            throw ConfigError("cannot parse seed '" + *seed + "'");
        cfg.seed = v;
    }
    if (samples)
        cfg.samples = parse_int(*samples, "samples");

    StateInputs st;
    if (ell)
        st.ell = parse_int(*ell, "ell");
    if (l1)
        st.l1 = parse_int(*l1, "l1");
    if (l2)
        st.l2 = parse_int(*l2, "l2");
    if (phi21)
        st.phi21 = parse_double(*phi21, "phi21");
    st.winding = winding;
    st.bell = bell;
    st.amplitudes = amplitudes;
    if (st.any())
        cfg.state = resolve_state(st);

    cfg.validate();
    return cfg;
}

PureState1x build_state(const RunConfig& cfg, std::ostream* warn)
{
    require_state(cfg);
    return make_state(*cfg.state, cfg.sites(), warn);
}

CommandOutput cmd_distribution(const RunConfig& cfg, std::ostream* warn)
{
    cfg.validate();
    const auto psi = build_state(cfg, warn);
    const auto table = coupling_table(cfg.ring(), cfg.Delta);
    const auto p = profile(psi, table);
    const auto pop = population(psi);
    const auto energy = per_site_energy(psi, table);
    const auto tags = optimal_transform_map(p);

    CommandOutput out;
    out.table.columns = {"S",      "le",     "branch",    "gS",         "Wx",
                         "Wz",     "deltaX", "deltaZ",    "convexity",  "population",
                         "per_site_energy", "transform"};
    for (const auto& s : p.sites) {
        const auto i = static_cast<std::size_t>(s.site - 1);
        out.table.rows.push_back({static_cast<long long>(s.site), s.le, std::string(to_string(s.branch)), s.gS, s.Wx, s.Wz,
                                  s.deltaX, s.deltaZ, s.convexity, pop[i], energy[i], std::string(to_string(tags[i]))});
    }
    out.report["max_le"] = rounded(p.max_le);
    out.report["argmax_site"] = p.argmax_site;
    out.report["mean_le"] = rounded(p.mean_le);
    out.report["mean_deltaX"] = rounded(p.mean_deltaX);
    out.report["mean_deltaZ"] = rounded(p.mean_deltaZ);
    out.report["energy"] = rounded(state_energy(psi, table).total);
    return out;
}

CommandOutput cmd_sweep(const RunConfig& cfg, std::ostream* warn)
{
    cfg.validate();
    const int L = cfg.sites();
    const int S = cfg.S.value_or(L);

    std::vector<std::pair<std::string, PureState1x>> states{{state_tag(*cfg.state), build_state(cfg, warn)}};
    if (cfg.components)
        for (const auto& w : std::get<SuperpositionSpec>(*cfg.state).windings.entries)
            states.emplace_back("l=" + std::to_string(w.ell), current_state(L, w.ell));

    const std::vector<double> deltas = cfg.delta_range ? cfg.delta_range->values() : std::vector<double>{cfg.Delta};
    const std::vector<double> js = cfg.J_range ? cfg.J_range->values() : std::vector<double>{cfg.J};

    struct Point {
        std::size_t state, d, j;
    };
    std::vector<Point> grid;
    for (std::size_t s = 0; s < states.size(); ++s)
        for (std::size_t d = 0; d < deltas.size(); ++d)
            for (std::size_t j = 0; j < js.size(); ++j)
                grid.push_back({s, d, j});

    std::vector<ErgotropyProfile> profiles(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const auto& pt = grid[i];
        profiles[i] = profile(states[pt.state].second, coupling_table(cfg.ring(js[pt.j]), deltas[pt.d]));
    });

    CommandOutput out;
    out.table.columns = {"state",       "Delta",       "J",           "max_le",        "argmax_site",
                         "mean_le",     "mean_deltaX", "mean_deltaZ", "convexity_at_S"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& p = profiles[i];
        out.table.rows.push_back({states[grid[i].state].first, deltas[grid[i].d], js[grid[i].j], p.max_le,
                                  static_cast<long long>(p.argmax_site), p.mean_le, p.mean_deltaX, p.mean_deltaZ,
                                  p.at(S).convexity});
    }

    // Sign changes of the convexity at S along the Delta axis.
    ojson changes = ojson::array();
    for (std::size_t s = 0; s < states.size(); ++s)
        for (std::size_t j = 0; j < js.size(); ++j)
            for (std::size_t d = 0; d + 1 < deltas.size(); ++d) {
                const auto idx = [&](std::size_t dd) { return (s * deltas.size() + dd) * js.size() + j; };
                const double a = profiles[idx(d)].at(S).convexity;
                const double b = profiles[idx(d + 1)].at(S).convexity;
                if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0))
                    changes.push_back({{"state", states[s].first},
                                       {"J", rounded(js[j])},
                                       {"Delta", {rounded(deltas[d]), rounded(deltas[d + 1])}},
                                       {"abs_Delta_over_J",
                                        {rounded(std::abs(deltas[d] / js[j])), rounded(std::abs(deltas[d + 1] / js[j]))}},
                                       {"to", b >= 0.0 ? "convex" : "concave"}});
            }
    out.report["S"] = S;
    out.report["convexity_sign_changes"] = changes;
    return out;
}

CommandOutput cmd_dynamics(const RunConfig& cfg, std::ostream* warn)
{
    cfg.validate();
    const auto psi = build_state(cfg, warn);
    const auto table = coupling_table(cfg.ring(), cfg.Delta);
    const auto times = time_grid(*cfg.t_max, cfg.dt);
    const auto traj = ergotropy_trajectory(psi, table, times);
    const auto drift = chirality_drift(traj);
    const int site = cfg.S.value_or(1);

    CommandOutput out;
    out.table.columns = {"t", "S", "le", "population", "drift", "drift_applicable"};
    double max_drift = 0.0, norm_dev = 0.0, energy_dev = 0.0;
    const double e0 = state_energy(psi, table).total;
    std::vector<double> le_site;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto pop = population(traj.states[i]);
        for (const auto& s : traj.profiles[i].sites)
            out.table.rows.push_back({times[i], static_cast<long long>(s.site), s.le,
                                      pop[static_cast<std::size_t>(s.site - 1)], drift[i].deviation,
                                      static_cast<long long>(drift[i].applicable ? 1 : 0)});
        max_drift = std::max(max_drift, drift[i].deviation);
        norm_dev = std::max(norm_dev, std::abs(traj.states[i].norm() - 1.0));
        energy_dev = std::max(energy_dev, std::abs(state_energy(traj.states[i], table).total - e0));
        le_site.push_back(traj.profiles[i].at(site).le);
    }

    out.report["site"] = site;
    const double period = oscillation_period(times, le_site);
    out.report["period"] = std::isnan(period) ? ojson(nullptr) : rounded(period);
    const auto tc = detect_two_current(psi);
    out.report["two_current"] = static_cast<bool>(tc);
    if (tc) {
        const auto sp = spectrum(table);
        out.report["omega"] = rounded(sp.at(tc->ell1) - sp.at(tc->ell2));
        ojson shifts = ojson::array();
        for (const auto& s : lattice_shift_times(table, tc->ell1, tc->ell2, *cfg.t_max))
            shifts.push_back({{"t", rounded(s.t)}, {"shift", s.shift}});
        out.report["shift_times"] = shifts;
    }
    out.report["max_drift"] = rounded(max_drift);
    out.report["norm_drift"] = rounded(norm_dev);
    out.report["energy_drift"] = rounded(energy_dev);
    return out;
}

CommandOutput cmd_verify(const RunConfig& cfg)
{
    cfg.validate();
    verify::OracleOptions opt;
    opt.seed = cfg.seed;
    opt.samples = cfg.samples;
    opt.L = cfg.L;
    if (opt.L && *opt.L > oracle::kDefaultCap)
        throw oracle::CapExceeded(*opt.L, oracle::kDefaultCap);
    const auto results = verify::run_all(opt);

    CommandOutput out;
    out.table.columns = {"suite", "pass", "max_deviation", "tolerance"};
    ojson suites = ojson::array();
    for (const auto& r : results) {
        out.table.rows.push_back({r.name, static_cast<long long>(r.pass ? 1 : 0), r.max_deviation, r.tolerance});
        suites.push_back({{"suite", r.name}, {"pass", r.pass}, {"notes", r.notes}});
        out.ok = out.ok && r.pass;
    }
    out.report["seed"] = cfg.seed;
    out.report["samples"] = cfg.samples;
    out.report["suites"] = suites;
    out.report["all_passed"] = out.ok;
    return out;
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
    return std::string(buf, res.ptr);
}

std::string to_csv(const Table& t)
{
    std::string s;
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        s += (c ? "," : "") + t.columns[c];
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                s += ',';
            s += cell_text(row[c]);
        }
        s += '\n';
    }
    return s;
}

std::string to_json(const RunConfig& cfg, const CommandOutput& out)
{
    ojson j;
    j["config"] = cfg.to_json();
    ojson rows = ojson::array();
    for (const auto& row : out.table.rows) {
        ojson r;
        for (std::size_t c = 0; c < row.size(); ++c)
            r[out.table.columns[c]] = cell_json(row[c]);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["report"] = out.report;
    return j.dump(2) + "\n";
}

ExitCode execute(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    CommandOutput result;
    switch (cfg.command) {
    case Command::Distribution: result = cmd_distribution(cfg, &err); break;
    case Command::Sweep: result = cmd_sweep(cfg, &err); break;
    case Command::Dynamics: result = cmd_dynamics(cfg, &err); break;
    case Command::Verify: result = cmd_verify(cfg); break;
    }
    const std::string text = cfg.format == Format::Json ? to_json(cfg, result) : to_csv(result.table);
    if (cfg.output.empty()) {
        out << text;
    } else {
        std::ofstream f(cfg.output, std::ios::binary);
        if (!f)
            throw ConfigError("cannot write output file '" + cfg.output + "'");
        f << text;
    }
    if (!result.ok) {
        err << "verification failed\n";
        return ExitCode::VerificationFailed;
    }
    return ExitCode::Ok;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    try {
        const RunConfig cfg = parse_command_line(argc, argv);
        return static_cast<int>(execute(cfg, out, err));
    } catch (const HelpRequested& h) {
        out << h.what();
        return static_cast<int>(ExitCode::Ok);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::InvalidConfig);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::InvalidConfig);
    } catch (const oracle::CapExceeded& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::OracleCapExceeded);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::InvalidConfig);
    }
}

} // namespace lergo::cli
