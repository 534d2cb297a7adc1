#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "vrclass/csv.hpp"
#include "vrclass/data_model.hpp"
#include "vrclass/dates.hpp"
#include "vrclass/error.hpp"
#include "vrclass/random.hpp"

using namespace vrclass;
using namespace std::chrono;

TEST_CASE("study window length by calendar enumeration") {
    int days = 0;
    for (sys_days d{kStudyStart}; d <= sys_days{kStudyEnd}; d += std::chrono::days{1}) {
        ++days;
    }
    CHECK(days == kStudyWindowDays);
    CHECK(days_inclusive(study_window()) == kStudyWindowDays);
    CHECK(days_inclusive({kStudyEnd, kStudyStart}) == 0);
}

TEST_CASE("iso dates are parsed strictly") {
    CHECK(parse_iso_date("2020-02-29") == year{2020} / February / 29);
    CHECK_FALSE(parse_iso_date("2021-02-29"));
    CHECK_FALSE(parse_iso_date("2020-1-30"));
    CHECK_FALSE(parse_iso_date("2020-01-30x"));
    CHECK_FALSE(parse_iso_date(""));
    CHECK(format_iso_date(kStudyStart) == "2020-01-30");
    CHECK(format_year_month(year{2021} / July) == "2021-07");
}

TEST_CASE("window overlap counts shared boundary days") {
    const auto w = study_window();
    CHECK(overlaps(year{2019} / 1 / 1, kStudyStart, w));
    CHECK(overlaps(kStudyEnd, year{2022} / 1 / 1, w));
    CHECK_FALSE(overlaps(year{2019} / 1 / 1, year{2020} / 1 / 29, w));
    CHECK_FALSE(overlaps(year{2021} / 7 / 20, year{2021} / 8 / 1, w));
}

TEST_CASE("csv line parsing handles quotes") {
    const auto row = csv::parse_line(R"(a,"b,c","say ""hi""",)");
    REQUIRE(row);
    CHECK(*row == csv::Row{"a", "b,c", "say \"hi\"", ""});
    CHECK_FALSE(csv::parse_line(R"(a,"unterminated)"));
    CHECK_FALSE(csv::parse_line(R"(a,"b"c)"));
}

TEST_CASE("csv escape and parse round trip") {
    const csv::Row fields = {"plain", "with,comma", "with \"quote\"", "", " spaced "};
    const auto back = csv::parse_line(csv::join(fields));
    REQUIRE(back);
    CHECK(*back == fields);
}

TEST_CASE("csv numbers round trip exactly") {
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(200)) - 100);
        const auto parsed = csv::parse_double(csv::format_double(v));
        REQUIRE(parsed);
        CHECK(*parsed == v);
    }
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::format_double(std::numeric_limits<double>::quiet_NaN()).empty());
    CHECK_FALSE(csv::parse_double(""));
    CHECK_FALSE(csv::parse_double("1.5x"));
    CHECK(csv::parse_double("+2.5") == 2.5);
    CHECK(csv::parse_int("42") == 42);
    CHECK_FALSE(csv::parse_int("4.2"));
}

TEST_CASE("csv table reader skips comments and reports missing columns") {
    std::istringstream in("# note\nx,y\r\n1,2\n\n3,4\n");
    const auto t = csv::read_table(in);
    CHECK(t.header == csv::Row{"x", "y"});
    CHECK(t.rows.size() == 2);
    CHECK(t.column("y") == 1);
    CHECK_THROWS_AS(t.column("z"), IngestError);
}

TEST_CASE("rng is deterministic and samples are sorted and distinct") {
    Rng a(11), b(11);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng r(3);
    for (int t = 0; t < 50; ++t) {
        const auto s = r.sample_without_replacement(30, 12);
        CHECK(s.size() == 12);
        CHECK(std::is_sorted(s.begin(), s.end()));
        CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 12);
        CHECK(s.back() < 30);
    }
    auto p = r.permutation(10);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(p[i] == i);
    }
    CHECK(derive_seed(1, 1) != derive_seed(1, 2));
    CHECK(derive_seed(1, 1) == derive_seed(1, 1));
}

TEST_CASE("rng uniform and normal moments") {
    Rng r(99);
    double su = 0, sn = 0, sn2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sn / n == doctest::Approx(0.0).epsilon(0.01));
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("validate_record") {
    auto r = testing::valid_record();
    CHECK(validate_record(r).empty());

    SUBCASE("fraction out of range") {
        r.occupancy_rate = 1.2;
        CHECK(validate_record(r) == std::vector<std::string>{"occupancy_rate out of [0,1]"});
    }
    SUBCASE("day budget") {
        r.reservation_days = r.available_days = r.blocked_days = 300;
        CHECK(validate_record(r) == std::vector<std::string>{"day budget exceeds 537"});
    }
    SUBCASE("day budget boundary") {
        r.reservation_days = 537;
        r.available_days = r.blocked_days = 0;
        CHECK(validate_record(r).empty());
        r.blocked_days = 1;
        CHECK(validate_record(r).size() == 1);
    }
    SUBCASE("ratings and counts") {
        r.rating_location = 0.5;
        r.bedrooms = -1;
        r.bathrooms = 1.25;
        r.adr = -3;
        const auto errs = validate_record(r);
        CHECK(errs.size() == 4);
        CHECK(std::find(errs.begin(), errs.end(), "rating_location out of [1,5]") != errs.end());
        CHECK(std::find(errs.begin(), errs.end(), "bedrooms negative") != errs.end());
        CHECK(std::find(errs.begin(), errs.end(), "bathrooms not a multiple of 0.5") != errs.end());
        CHECK(std::find(errs.begin(), errs.end(), "adr negative") != errs.end());
    }
    SUBCASE("absent ratings are fine") {
        r.rating_overall.reset();
        CHECK(validate_record(r).empty());
    }
    SUBCASE("dates") {
        r.last_active = year{2019} / 1 / 1;
        CHECK(validate_record(r) == std::vector<std::string>{"last_active before first_active"});
    }
    SUBCASE("non-finite") {
        r.adr = std::numeric_limits<double>::infinity();
        const auto errs = validate_record(r);
        CHECK(std::find(errs.begin(), errs.end(), "adr not finite") != errs.end());
    }
}

TEST_CASE("numeric feature accessors cover all 24 variables") {
    auto r = testing::valid_record();
    CHECK(kNumericFeatures.size() == 24);
    std::set<std::string_view> names;
    for (const auto& info : kNumericFeatures) {
        names.insert(info.name);
        set_numeric_feature(r, info.id, 3.0);
        CHECK(numeric_feature(r, info.id) == 3.0);
    }
    CHECK(names.size() == 24);
    set_numeric_feature(r, NumericFeature::rating_checkin, std::nullopt);
    CHECK_FALSE(numeric_feature(r, NumericFeature::rating_checkin));
}

TEST_CASE("records_to_matrix layout") {
    std::vector<PropertyRecord> recs = {testing::valid_record("A"), testing::valid_record("B")};
    recs[1].property_type = "private-room";
    recs[1].urban_rural = UrbanRural::rural;
    recs[1].rating_overall.reset();
    const auto m = records_to_matrix(recs);
    m.check_shape();
    CHECK(m.cols() == 27);
    CHECK(m.row_ids == std::vector<std::string>{"A", "B"});
    CHECK(std::isnan(m.values(1, *m.find_column("rating_overall"))));
    const auto pt = *m.find_column("property_type");
    CHECK(m.columns[pt].kind == ColumnKind::nominal);
    CHECK(m.columns[pt].levels == std::vector<std::string>{"entire-home", "private-room"});
    CHECK(m.values(1, pt) == 1.0);
    CHECK(m.columns[*m.find_column("citytown_class")].kind == ColumnKind::ordinal);
}

TEST_CASE("feature matrix checks") {
    FeatureMatrix m;
    m.values = Matrix(2, 1, 0.0);
    m.columns = {{"x", ColumnKind::numeric, Transform::none, std::nullopt, {}}};
    m.row_ids = {"a"};
    CHECK_THROWS(m.check_shape());
    m.row_ids = {"a", "b"};
    CHECK_NOTHROW(m.check_shape());
    m.values(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(m.check_finite());
}

TEST_CASE("matrix helpers") {
    const auto a = Matrix::from_rows({{1, 2}, {3, 4}});
    const auto i = Matrix::identity(2);
    CHECK(multiply(a, i) == a);
    CHECK(a.transposed()(0, 1) == 3);
    CHECK(a.column(1) == std::vector<double>{2, 4});
    CHECK(squared_distance(a.row(0), a.row(1)) == 8);
    CHECK(distance(a.row(0), a.row(1)) == doctest::Approx(std::sqrt(8.0)));
}
