#include "cycmpdr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <locale>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "cycmpdr/error.hpp"

namespace cycmpdr {

double si_sdr(std::span<const double> estimate, std::span<const double> reference) {
    if (estimate.size() != reference.size()) throw Error("si-sdr: length mismatch");
    const double rr = energy(reference);
    if (!(rr > 0.0)) throw Error("si-sdr: zero reference");
    double er = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) er += estimate[i] * reference[i];
    const double scale = er / rr;

    double target = 0.0, residual = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double s = scale * reference[i];
        const double e = estimate[i] - s;
        target += s * s;
        residual += e * e;
    }
    if (residual == 0.0) return target > 0.0 ? kSiSdrCapDb : -kSiSdrCapDb;
    if (target == 0.0) return -kSiSdrCapDb;
    return std::clamp(10.0 * std::log10(target / residual), -kSiSdrCapDb, kSiSdrCapDb);
}

double si_sdr(const AudioBuffer& estimate, const AudioBuffer& reference) {
    return si_sdr(std::span<const double>(estimate.samples), std::span<const double>(reference.samples));
}

std::string SnrBucket::label() const {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << '[' << lo << ',' << hi << (closed ? ']' : ')');
    return os.str();
}

std::vector<SnrBucket> default_buckets() { return {{-20.0, -10.0, false}, {-10.0, 0.0, true}}; }

namespace {

struct Acc {
    std::size_t n = 0;
    double snr = 0.0, sdr = 0.0, stoi = 0.0;

    void add(const MetricRecord& r) {
        ++n;
        snr += r.input_snr_db;
        sdr += r.si_sdr_db;
        stoi += r.stoi;
    }
};

std::ostream& fixed6(std::ostream& os) { return os << std::fixed << std::setprecision(6); }

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<MetricRecord>& records, const std::vector<SnrBucket>& buckets) {
    if (records.empty()) throw Error("aggregate: no records");
    // Bucket index buckets.size() is the "other" row.
    std::map<std::tuple<std::size_t, std::string, std::string>, Acc> cells;
    for (const auto& r : records) {
        std::size_t b = 0;
        while (b < buckets.size() && !buckets[b].contains(r.input_snr_db)) ++b;
        cells[{b, r.preproc, r.mask}].add(r);
    }
    std::vector<AggregateRow> rows;
    for (const auto& [key, acc] : cells) {
        const auto& [b, preproc, mask] = key;
        AggregateRow row;
        row.bucket = b < buckets.size() ? buckets[b].label() : "other";
        row.preproc = preproc;
        row.mask = mask;
        row.count = acc.n;
        row.mean_input_snr_db = acc.snr / static_cast<double>(acc.n);
        row.mean_si_sdr_db = acc.sdr / static_cast<double>(acc.n);
        row.mean_stoi = acc.stoi / static_cast<double>(acc.n);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CurvePoint> snr_curves(const std::vector<MetricRecord>& records, double bin_width_db) {
    if (!(bin_width_db > 0.0)) throw Error("curves: bin width must be positive");
    std::map<std::tuple<std::string, std::string, long>, Acc> cells;
    for (const auto& r : records) cells[{r.preproc, r.mask, std::lround(r.input_snr_db / bin_width_db)}].add(r);
    std::vector<CurvePoint> out;
    for (const auto& [key, acc] : cells) {
        const auto& [preproc, mask, idx] = key;
        out.push_back({preproc, mask, static_cast<double>(idx) * bin_width_db, acc.n,
                       acc.sdr / static_cast<double>(acc.n), acc.stoi / static_cast<double>(acc.n)});
    }
    return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricRecord>& records) {
    os.imbue(std::locale::classic());
    os << "file,input_snr_db,preproc,mask,si_sdr_db,stoi\n";
    for (const auto& r : records) {
        os << r.file << ',' << fixed6 << r.input_snr_db << ',' << r.preproc << ',' << r.mask << ',' << r.si_sdr_db
           << ',' << r.stoi << '\n';
    }
}

std::vector<MetricRecord> read_metrics_csv(std::istream& is) {
    is.imbue(std::locale::classic());
    std::string line;
    if (!std::getline(is, line) || line != "file,input_snr_db,preproc,mask,si_sdr_db,stoi") {
        throw Error("metrics csv: unexpected header");
    }
    std::vector<MetricRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ls.imbue(std::locale::classic());
        std::string f[6];
        for (auto& field : f) std::getline(ls, field, ',');
        MetricRecord r;
        r.file = f[0];
        r.input_snr_db = std::stod(f[1]);
        r.preproc = f[2];
        r.mask = f[3];
        r.si_sdr_db = std::stod(f[4]);
        r.stoi = std::stod(f[5]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
    os.imbue(std::locale::classic());
    // pesq and dnsmos are reserved for externally computed values.
    os << "bucket,preproc,mask,count,mean_input_snr_db,mean_si_sdr_db,mean_stoi,mean_pesq,mean_dnsmos\n";
    for (const auto& r : rows) {
        os << r.bucket << ',' << r.preproc << ',' << r.mask << ',' << r.count << ',' << fixed6 << r.mean_input_snr_db
           << ',' << r.mean_si_sdr_db << ',' << r.mean_stoi << ",,\n";
    }
}

void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
    os.imbue(std::locale::classic());
    os << "preproc,mask,snr_center_db,count,mean_si_sdr_db,mean_stoi\n";
    for (const auto& p : points) {
        os << p.preproc << ',' << p.mask << ',' << fixed6 << p.snr_center_db << ',' << p.count << ','
           << p.mean_si_sdr_db << ',' << p.mean_stoi << '\n';
    }
}

}  // namespace cycmpdr
