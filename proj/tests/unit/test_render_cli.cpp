#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include <sys/wait.h>

#include "chipnet/dse.hpp"
#include "chipnet/render.hpp"
#include "fixtures.hpp"

using namespace chipnet;
using nlohmann::json;

namespace {

int count(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

csv::Table table(const std::string& text) {
    std::istringstream in(text);
    return csv::read(in);
}

#ifdef CHIPNET_CLI
struct Run {
    int status = -1;
    std::string out;
};

// Runs the CLI with stderr discarded; returns exit status and stdout.
Run cli(const std::string& args) {
    std::string cmd = std::string(CHIPNET_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}
#endif

}  // namespace

TEST_CASE("render_svg draws every element once") {
    DesignBundle b = fixtures::load("mesh2x2");
    std::string svg = render_svg(b);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(count(svg, "<svg ") == 1);
    CHECK(count(svg, "<rect") == 4);
    CHECK(count(svg, "<polyline") == static_cast<int>(b.topology.links.size()));
    CHECK(count(svg, "<polyline") == 4);
    CHECK(count(svg, "<polygon") == 1);
    int phys = 0;
    for (const auto& l : b.topology.links) phys += (l.a.kind == EndpointKind::chiplet) + (l.b.kind == EndpointKind::chiplet);
    CHECK(count(svg, "<circle") >= phys);
    CHECK(render_svg(b) == svg);

    DesignBundle routers = fixtures::load("router_pair");
    std::string rsvg = render_svg(routers);
    CHECK(count(rsvg, "<rect") == 2);
    CHECK(count(rsvg, "<polyline") == 2);
}

TEST_CASE("manhattan links have one bend at most, direct links none") {
    DesignBundle b = fixtures::load("two_chiplet");
    b.placement.instances[1].position.y += 3;
    b.packaging.link_routing = LinkRouting::manhattan;
    std::regex pts("<polyline[^>]*points=\"([^\"]*)\"");
    std::smatch m;
    std::string svg = render_svg(b);
    REQUIRE(std::regex_search(svg, m, pts));
    CHECK(count(m[1].str(), ",") == 3);
    b.packaging.link_routing = LinkRouting::direct;
    svg = render_svg(b);
    REQUIRE(std::regex_search(svg, m, pts));
    CHECK(count(m[1].str(), ",") == 2);
}

TEST_CASE("rotated chiplets swap width and height") {
    DesignBundle b = fixtures::load("two_chiplet");
    b.chiplets[0].width_mm = 6;
    b.chiplets[0].height_mm = 3;
    for (auto& phy : b.chiplets[0].phys) phy.position = {std::min(phy.position.x, 6.0), std::min(phy.position.y, 3.0)};
    const ChipletDef& c = b.chiplet_of(0);
    b.placement.instances[0].rotation = Rotation::deg90;
    std::string svg = render_svg(b);
    std::regex rect("<rect[^>]*width=\"([0-9.]+)\" height=\"([0-9.]+)\"");
    std::smatch m;
    REQUIRE(std::regex_search(svg, m, rect));
    CHECK(std::stod(m[1]) == doctest::Approx(10 * c.height_mm));
    CHECK(std::stod(m[2]) == doctest::Approx(10 * c.width_mm));
}

TEST_CASE("plot_data latency_vs_load sorts by series then rate") {
    csv::Table in = table("design,rate,avg_latency_cycles\nb,0.2,40\na,0.3,50\na,0.1,30\nb,0.1,35\nx,bad,1\n");
    csv::Table out = plot_data(in, PlotKind::latency_vs_load);
    CHECK(out.header == std::vector<std::string>{"series", "injection_rate", "avg_latency_cycles"});
    REQUIRE(out.rows.size() == 4);
    CHECK(out.rows[0][0] == "a");
    CHECK(std::stod(out.rows[0][1]) == 0.1);
    CHECK(std::stod(out.rows[1][1]) == 0.3);
    CHECK(out.rows[2][0] == "b");
    CHECK(std::stod(out.rows[2][2]) == 35);

    CHECK_THROWS_WITH_AS(plot_data(table("rate,avg_latency_cycles\nx,y\n"), PlotKind::latency_vs_load), "no rows",
                         ModelError);
    CHECK_THROWS_AS(plot_data(table("rate\n1\n"), PlotKind::latency_vs_load), ModelError);
    CHECK_THROWS_AS(parse_plot_kind("histogram"), std::exception);
}

TEST_CASE("plot_data pareto_scatter marks the front") {
    std::vector<dse::ResultRow> rows(3);
    for (int i = 0; i < 3; ++i) {
        rows[i].index = i;
        rows[i].topology = "shg";
        rows[i].rows = rows[i].cols = 4;
    }
    rows[0].proxy_latency_cycles = 10, rows[0].proxy_throughput_units = 5;
    rows[1].proxy_latency_cycles = 12, rows[1].proxy_throughput_units = 4;
    rows[2].error = "failed";
    std::ostringstream out;
    dse::write_results(out, rows);
    csv::Table t = plot_data(table(out.str()), PlotKind::pareto_scatter);
    REQUIRE(t.rows.size() == 2);
    int front = t.column("on_front");
    REQUIRE(front >= 0);
    CHECK(t.rows[0][front] == "1");
    CHECK(t.rows[1][front] == "0");
}

#ifdef CHIPNET_CLI
TEST_CASE("cli exit codes and outputs") {
    fixtures::TempDir dir;
    const std::string good = fixtures::path("two_chiplet");
    const std::string bad = fixtures::path("invalid_overlap");
    const std::string d = dir.path().string();

    CHECK(cli("").status == 1);
    CHECK(cli("frobnicate").status == 1);
    CHECK(cli("--help").status == 0);

    CHECK(cli("validate " + good).status == 0);
    CHECK(cli("validate " + bad).status == 1);
    CHECK(cli("validate " + d + "/missing.json").status == 1);

    Run est = cli("estimate " + good);
    REQUIRE(est.status == 0);
    json j = json::parse(est.out);
    CHECK(j["latency_cycles"] == 32.0);
    CHECK_FALSE(j.contains("edges"));
    CHECK(json::parse(cli("estimate --edges " + good).out).contains("edges"));
    CHECK(cli("estimate " + bad).status == 1);

    Run rep = cli("report " + good);
    REQUIRE(rep.status == 0);
    CHECK(json::parse(rep.out).contains("chiplet_area_mm2"));
    CHECK(json::parse(rep.out).contains("cost"));

    CHECK(cli("render " + good + " -o " + d + "/a.svg").status == 0);
    CHECK(cli("render " + good + " -o " + d + "/b.svg").status == 0);
    CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
    CHECK(slurp(dir / "a.svg") == render_svg(fixtures::load("two_chiplet")));

    Run tr = cli("simulate " + good + " --trace");
    CHECK(tr.status == 0);
    CHECK(cli("simulate " + good + " --rate 0.05 --saturation").status == 1);
    CHECK(cli("simulate " + good + " --rate=-1").status == 1);
    // offered load above one flit per cycle is accepted and reported as saturated
    Run over = cli("simulate " + good + " --rate 2");
    CHECK(over.status == 0);
    CHECK(json::parse(over.out)["saturated"] == true);
    Run sat = cli("simulate " + good + " --saturation --log " + d + "/probes.csv");
    CHECK(sat.status == 0);
    Run plot = cli("plotdata " + d + "/probes.csv --kind latency_vs_load");
    CHECK(plot.status == 0);
    CHECK(plot.out.rfind("series,injection_rate,avg_latency_cycles", 0) == 0);
    CHECK(cli("plotdata " + d + "/probes.csv --kind histogram").status == 1);

    dir.write("point.json", R"({"topology": "mesh", "rows": 2, "cols": 3})");
    CHECK(cli("generate " + d + "/point.json -o " + d + "/gen").status == 0);
    CHECK(cli("validate " + d + "/gen/design.json").status == 0);
    dir.write("badpoint.json", R"({"topology": "hypercube", "rows": 3, "cols": 3})");
    CHECK(cli("generate " + d + "/badpoint.json -o " + d + "/gen2").status != 0);

    dir.write("exp.json", R"({"topologies": ["mesh", "hypercube"], "grid_sizes": [[2, 2], [3, 3]], "workers": 2})");
    Run sw = cli("sweep " + d + "/exp.json -o " + d + "/sweep");
    CHECK(sw.status == 0);
    auto rows = dse::read_results(d + "/sweep/results.csv");
    CHECK(rows.size() == 4);
    CHECK(cli("pareto " + d + "/sweep/results.csv").status == 0);
    CHECK(cli("pareto " + d + "/sweep/results.csv --max-area-overhead 0").status == 0);
    CHECK(cli("compare " + d + "/sweep/results.csv").status == 0);
    CHECK(cli("plotdata " + d + "/sweep/results.csv --kind pareto_scatter").status == 0);
    dir.write("bad_exp.json", R"({"topologies": []})");
    CHECK(cli("sweep " + d + "/bad_exp.json -o " + d + "/sweep2").status == 1);
    dir.write("broken.csv", "a,b\n1\n");
    CHECK(cli("pareto " + d + "/broken.csv").status == 1);
}
#endif
