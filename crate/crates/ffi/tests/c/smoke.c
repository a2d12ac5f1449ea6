#include <stdio.h>
#include <string.h>

#include "flowtrack.h"

static const char *DETS =
    "1,-1,0,0,10,20,0.9,-1,-1,-1\n"
    "2,-1,1,0,10,20,0.8,-1,-1,-1\n"
    "2,-1,300,0,10,20,0.1,-1,-1,-1\n"
    "3,-1,2,0,10,20,0.95,-1,-1,-1\n";

static const char *GT =
    "1,1,0,0,10,20,1,1,1\n"
    "2,1,1,0,10,20,1,1,1\n"
    "3,1,2,0,10,20,1,1,1\n";

int main(void) {
    if (ft_detection_cost(0.25, 0.5) != 0.5) return 1;

    FtCostConfig cfg = ft_cost_config_default();
    FtTracks *tracks = NULL;
    if (ft_track_lp2d(DETS, 50.0, &cfg, &tracks) != FT_STATUS_OK) return 2;
    if (ft_tracks_count(tracks) != 1) return 3;

    char *mot = NULL;
    if (ft_tracks_to_mot(tracks, &mot) != FT_STATUS_OK) return 4;
    FtEvalReport report;
    if (ft_evaluate(GT, mot, 0.5, &report) != FT_STATUS_OK) return 5;
    if (report.mota != 1.0 || report.id_switches != 0) return 6;
    ft_string_free(mot);
    ft_tracks_free(tracks);

    FtModel *model = NULL;
    if (ft_model_from_string("not a model", &model) != FT_STATUS_MODEL_FORMAT) return 7;
    if (ft_last_error() == NULL || strlen(ft_last_error()) == 0) return 8;

    puts("ok");
    return 0;
}
