#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rayloc/errors.hpp"
#include "rayloc/localization.hpp"
#include "rayloc/map_io.hpp"
#include "rayloc/raytracer.hpp"
#include "rayloc/simharness.hpp"

namespace {

using namespace rayloc;

std::string num(double v, int precision = 9) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

Vec3 parse_vec3(const std::string& text, const std::string& flag) {
    Vec3 v;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    in >> v.x >> c1 >> v.y >> c2 >> v.z;
    if (in.fail() || c1 != ',' || c2 != ',' || !(in >> std::ws).eof())
        throw validation_error(flag + ": expected x,y,z but got '" + text + "'");
    return v;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (std::string& f : fields) {
        const auto begin = f.find_first_not_of(" \t\r");
        const auto end = f.find_last_not_of(" \t\r");
        f = begin == std::string::npos ? "" : f.substr(begin, end - begin + 1);
    }
    return fields;
}

std::vector<PathObservation> load_observations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open observation file '" + path + "'");
    std::vector<PathObservation> obs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "obs file line " + std::to_string(line_no);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') continue;
        auto fields = split_csv_row(line);
        if (line_no == 1 && !fields.empty() && fields[0] == "bs_id") continue;  // header
        if (fields.size() != 7)
            throw parse_error(where + ": expected 7 fields "
                              "(bs_id,bs_x,bs_y,bs_z,az_deg,el_deg,tof_ns), got " +
                              std::to_string(fields.size()));
        PathObservation o;
        o.bs_id = fields[0];
        try {
            o.bs_position = {std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
            o.angle.azimuth = deg_to_rad(std::stod(fields[4]));
            o.angle.elevation = deg_to_rad(std::stod(fields[5]));
            o.tof_s = std::stod(fields[6]) * 1e-9;
        } catch (const std::exception&) {
            throw parse_error(where + ": malformed number");
        }
        obs.push_back(std::move(o));
    }
    if (obs.empty()) throw parse_error("obs file '" + path + "': no observations");
    return obs;
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw io_error("failed writing '" + path + "'");
}

struct TraceArgs {
    std::string map_path;
    std::string tx_text;
    std::string rx_text;
    std::string out_path;
    TraceConfig cfg;
};

int run_trace(const TraceArgs& args) {
    const IndoorMap map = load_map_file(args.map_path);
    const Vec3 tx = parse_vec3(args.tx_text, "--tx");
    const Vec3 rx = parse_vec3(args.rx_text, "--rx");
    const auto components = trace(map, tx, rx, args.cfg);

    std::ostringstream out;
    out << "tof_ns,aod_az_deg,aod_el_deg,aoa_az_deg,aoa_el_deg,power_dbm,path_length_m,"
           "signature\n";
    for (const MultipathComponent& c : components) {
        out << num(c.tof_s * 1e9) << ',' << num(rad_to_deg(c.aod.azimuth)) << ','
            << num(rad_to_deg(c.aod.elevation)) << ',' << num(rad_to_deg(c.aoa.azimuth)) << ','
            << num(rad_to_deg(c.aoa.elevation)) << ',' << num(c.received_power_dbm) << ','
            << num(c.path_length_m) << ',' << signature_to_string(c.interactions) << '\n';
    }
    write_text(args.out_path, out.str());
    return 0;
}

struct LocateArgs {
    std::string map_path;
    std::string obs_path;
    int max_interactions = kDefaultMaxInteractions;
    double cluster_threshold_m = kDefaultClusterThresholdM;
};

int run_locate(const LocateArgs& args) {
    const IndoorMap map = load_map_file(args.map_path);
    const auto observations = load_observations(args.obs_path);
    const LocateResult res =
        locate(map, observations, args.max_interactions, args.cluster_threshold_m);

    std::ostringstream out;
    out << "estimate: " << num(res.position.x) << ' ' << num(res.position.y) << ' '
        << num(res.position.z) << '\n';
    out << "ambiguous: " << (res.ambiguous ? "yes" : "no") << '\n';
    out << "observations: " << observations.size() << '\n';
    out << "candidates: " << res.candidate_count << '\n';
    out << "clusters: " << res.clusters.size() << '\n';
    for (std::size_t i = 0; i < res.clusters.size(); ++i) {
        const ClusterEstimate& c = res.clusters[i];
        out << "cluster " << i + 1 << ": members=" << c.member_count
            << " distinct_observations=" << c.distinct_observations << " centroid=("
            << num(c.centroid.x) << ", " << num(c.centroid.y) << ", " << num(c.centroid.z)
            << ") rms_radius_m=" << num(c.rms_radius_m)
            << " mean_residual_m=" << num(c.mean_residual_m) << '\n';
    }
    std::cout << out.str();
    return 0;
}

struct SimulateArgs {
    std::string scenario_path;
    std::string out_dir;
};

int run_simulate(const SimulateArgs& args, const std::uint64_t* seed_override) {
    ScenarioConfig cfg = load_scenario(args.scenario_path);
    if (seed_override) cfg.rng_seed = *seed_override;
    const ErrorStats stats = run_scenario(cfg);
    write_outputs(stats, args.out_dir);

    std::ostringstream out;
    out << "scenario: " << cfg.name << '\n';
    out << "resampled_users: " << stats.resampled_users << '\n';
    out << "undercovered_users: " << stats.undercovered_users << '\n';
    for (const SeriesStats& s : stats.series) {
        out << "bs_count " << s.bs_count << ": users=" << s.users.size();
        if (!s.sorted_errors.empty()) {
            out << " mean_rms_m=" << num(s.mean_error())
                << " median_rms_m=" << num(s.median_error())
                << " p90_rms_m=" << num(s.percentile(90.0));
        }
        out << '\n';
    }
    std::cout << out.str();
    return 0;
}

int run_validate_map(const std::string& path) {
    const IndoorMap map = load_map_file(path);
    const Aabb& b = map.bounding_box();
    std::cout << "map '" << map.name() << "': " << map.surfaces().size() << " surfaces, bounds ["
              << num(b.min.x, 3) << ", " << num(b.min.y, 3) << ", " << num(b.min.z, 3)
              << "] to [" << num(b.max.x, 3) << ", " << num(b.max.y, 3) << ", "
              << num(b.max.z, 3) << "]\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indoor mmWave ray tracing and map-assisted localization"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    CLI::Option* seed_opt = app.add_option("--seed", seed, "Override the scenario RNG seed");

    TraceArgs targs;
    CLI::App* trace_cmd = app.add_subcommand("trace", "Trace multipath components TX -> RX");
    trace_cmd->add_option("--map", targs.map_path, "Map file")->required();
    trace_cmd->add_option("--tx", targs.tx_text, "Transmitter position x,y,z [m]")->required();
    trace_cmd->add_option("--rx", targs.rx_text, "Receiver position x,y,z [m]")->required();
    trace_cmd->add_option("--freq", targs.cfg.frequency_hz, "Carrier frequency [Hz]");
    trace_cmd->add_option("--tess", targs.cfg.tessellation_factor, "Tessellation factor N");
    trace_cmd->add_option("--tx-power", targs.cfg.tx_power_dbm, "Transmit power [dBm]");
    trace_cmd->add_option("--max-reflections", targs.cfg.max_reflections,
                          "Reflection cap per path");
    trace_cmd->add_option("--max-transmissions", targs.cfg.max_transmissions,
                          "Transmission cap per path");
    trace_cmd->add_option("--alpha", targs.cfg.capture_alpha, "Reception sphere scale");
    trace_cmd->add_option("--floor", targs.cfg.min_power_dbm, "Detection floor [dBm]");
    trace_cmd->add_option("--threads", targs.cfg.threads, "Worker threads (0 = auto)");
    trace_cmd->add_option("--out", targs.out_path, "Output CSV path (default stdout)");

    LocateArgs largs;
    CLI::App* locate_cmd =
        app.add_subcommand("locate", "Estimate a position from path observations");
    locate_cmd->add_option("--map", largs.map_path, "Map file")->required();
    locate_cmd->add_option("--obs", largs.obs_path,
                           "Observation CSV (bs_id,bs_x,bs_y,bs_z,az_deg,el_deg,tof_ns)")
        ->required();
    locate_cmd->add_option("--max-interactions", largs.max_interactions,
                           "Back-propagation interaction cap");
    locate_cmd->add_option("--cluster-threshold", largs.cluster_threshold_m,
                           "Cluster linkage distance [m]");

    SimulateArgs sargs;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "Run a Monte Carlo localization scenario");
    simulate_cmd->add_option("--scenario", sargs.scenario_path, "Scenario file")->required();
    simulate_cmd->add_option("--out", sargs.out_dir, "Output directory")->required();

    std::string validate_path;
    CLI::App* validate_cmd =
        app.add_subcommand("validate-map", "Load and validate a map file");
    validate_cmd->add_option("file", validate_path, "Map file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*trace_cmd) return run_trace(targs);
        if (*locate_cmd) return run_locate(largs);
        if (*simulate_cmd)
            return run_simulate(sargs, seed_opt->count() > 0 ? &seed : nullptr);
        if (*validate_cmd) return run_validate_map(validate_path);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
