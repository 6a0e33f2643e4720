#pragma once

// Synthetic inputs shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace fixture {

struct Game {
    std::string team, opponent, season, date;
    int period = 1;
    int playoffs = 0;
    int points = 0;
};

inline const char* kLakersQuery =
    "SELECT * FROM df WHERE team_name = 'Los Angeles Lakers' AND opponent = 'DET' AND season = '2003-04' "
    "AND period = 2 AND playoffs = 1 ORDER BY date LIMIT 10";

// 50 rows with enough Lakers-vs-Detroit playoff rows in period 2 that the
// limit bites, dates out of order and a few repeated.
inline std::vector<Game> nba_games(unsigned seed = 2004, int rows = 50)
{
    std::mt19937 rng(seed);
    const char* teams[] = {"Los Angeles Lakers", "Detroit Pistons", "San Antonio Spurs"};
    const char* opps[] = {"DET", "SAS", "MIN", "LAL"};
    const char* seasons[] = {"2002-03", "2003-04"};
    std::vector<Game> g;
    for (int i = 0; i < rows; ++i) {
        Game x;
        bool target = rng() % 5 < 2;
        x.team = target ? teams[0] : teams[rng() % 3];
        x.opponent = target ? "DET" : opps[rng() % 4];
        x.season = target ? "2003-04" : seasons[rng() % 2];
        x.period = target ? 2 : 1 + static_cast<int>(rng() % 4);
        x.playoffs = target ? 1 : static_cast<int>(rng() % 2);
        int day = 1 + static_cast<int>(rng() % 20);
        char buf[16];
        std::snprintf(buf, sizeof buf, "2004-06-%02d", day);
        x.date = buf;
        x.points = 70 + static_cast<int>(rng() % 50);
        g.push_back(x);
    }
    return g;
}

inline std::string nba_csv(const std::vector<Game>& games)
{
    std::string csv = "date,team_name,opponent,season,period,playoffs,points\n";
    for (const auto& g : games)
        csv += g.date + "," + g.team + "," + g.opponent + "," + g.season + "," + std::to_string(g.period) + "," +
               std::to_string(g.playoffs) + "," + std::to_string(g.points) + "\n";
    return csv;
}

// Row scan for the Lakers query: filter, stable order by date, first 10.
inline std::vector<std::size_t> lakers_oracle(const std::vector<Game>& games)
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < games.size(); ++i) {
        const Game& g = games[i];
        if (g.team == "Los Angeles Lakers" && g.opponent == "DET" && g.season == "2003-04" && g.period == 2 &&
            g.playoffs == 1)
            rows.push_back(i);
    }
    // Insertion sort keeps equal dates in source order.
    for (std::size_t i = 1; i < rows.size(); ++i)
        for (std::size_t j = i; j > 0 && games[rows[j]].date < games[rows[j - 1]].date; --j) std::swap(rows[j], rows[j - 1]);
    if (rows.size() > 10) rows.resize(10);
    return rows;
}

struct GalleryEntry {
    std::string id;
    bool animated = false;
    std::string caption;
    std::vector<std::string> frameCaptions;
};

inline const std::vector<std::string>& gallery_words()
{
    static const std::vector<std::string> w = {"canary", "bird", "yellow", "wing", "flap", "sun", "ball", "basketball",
                                               "blue", "ocean", "wave", "leaf", "green", "tree", "music", "note",
                                               "heart", "red", "coffee", "cup", "trophy", "gold", "feather", "egg",
                                               "nest", "spin", "bounce", "court", "sky", "night"};
    return w;
}

inline std::string random_phrase(std::mt19937& rng, int minWords, int maxWords)
{
    const auto& w = gallery_words();
    int n = minWords + static_cast<int>(rng() % static_cast<unsigned>(maxWords - minWords + 1));
    std::string s;
    for (int i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += w[rng() % w.size()];
    }
    return s;
}

// Seeded captioned corpus: 30 static and 20 animated assets.
inline std::vector<GalleryEntry> gallery_corpus(unsigned seed = 42, int statics = 30, int animated = 20)
{
    std::mt19937 rng(seed);
    std::vector<GalleryEntry> out;
    for (int i = 0; i < statics; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "s%02d", i);
        out.push_back({id, false, random_phrase(rng, 2, 5), {}});
    }
    // Two identical captions so ties must break by id.
    out[5].caption = out[3].caption;
    for (int i = 0; i < animated; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "a%02d", i);
        GalleryEntry e{id, true, random_phrase(rng, 2, 4), {}};
        int frames = 2 + static_cast<int>(rng() % 5);
        for (int f = 0; f < frames; ++f) e.frameCaptions.push_back(random_phrase(rng, 1, 4));
        out.push_back(e);
    }
    return out;
}

inline std::string small_svg(const std::string& fill)
{
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 10 10\"><rect x=\"0\" y=\"0\" width=\"10\" "
           "height=\"10\" fill=\"" + fill + "\"/></svg>";
}

} // namespace fixture
