#pragma once

#include <string>

namespace aead::test {

// Five buildings plus one with an unreadable site id. Site 2 has no weather.
inline const std::string kBuildingCsv =
    "site_id,building_id,primary_use,square_feet,year_built,floor_count\n"
    "0,0,Education,7432,2008,\n"
    "0,1,\"Lodging/residential\",2720,2004,\n"
    "1,2,\"Office, annex\",5376,1991,3\n"
    "1,3,Education,23685,2002,\n"
    "2,4,Entertainment/public assembly,116607,1975,5\n"
    "x,5,Office,1000,2000,1\n";

inline const std::string kWeatherCsv =
    "site_id,timestamp,air_temperature,cloud_coverage,dew_temperature,precip_depth_1_hr,"
    "sea_level_pressure,wind_direction,wind_speed\r\n"
    "0,2016-01-01 00:00:00,25.0,6,20.0,0,1019.7,0,0.0\r\n"
    "0,2016-01-01 01:00:00,24.4,,21.1,-1,1020.2,70,1.5\r\n"
    "0,2016-01-01 02:00:00,22.8,2,21.1,0,1020.2,0,0.0\r\n"
    "1,2016-01-01 00:00:00,3.8,0,2.4,0,1020.9,240,3.1\r\n"
    "1,2016-01-01 01:00:00,3.7,0,2.4,0,1021.6,230,2.6\r\n"
    "1,2016-01-01 01:00:00,oops,0,2.4,0,1021.6,230,2.6\r\n";

// 20 meter rows:
//  rows 1-6, 8, 9, 11, 20 join (10 records)
//  rows 7, 10, 12, 13, 14 have no weather at that site/time (5)
//  rows 15-17 reference unknown or unreadable buildings (3)
//  rows 18, 19 cannot be parsed (2)
inline const std::string kMeterCsv =
    "building_id,meter,timestamp,meter_reading\n"
    "0,0,2016-01-01 00:00:00,0\n"
    "0,0,2016-01-01 01:00:00,1.5\n"
    "0,0,2016-01-01 02:00:00,2.5\n"
    "0,1,2016-01-01 00:00:00,10\n"
    "1,0,2016-01-01 00:00:00,3.25\n"
    "1,0,2016-01-01 01:00:00,4\n"
    "1,0,2016-01-01 03:00:00,5\n"
    "2,0,2016-01-01 00:00:00,100\n"
    "2,0,2016-01-01 01:00:00,110\n"
    "2,0,2016-01-01 02:00:00,120\n"
    "3,2,2016-01-01 00:00:00,7\n"
    "3,2,2016-01-01 02:00:00,8\n"
    "4,0,2016-01-01 00:00:00,50\n"
    "4,0,2016-01-01 01:00:00,51\n"
    "9,0,2016-01-01 00:00:00,1\n"
    "9,0,2016-01-01 01:00:00,2\n"
    "5,0,2016-01-01 00:00:00,3\n"
    "0,0,,4\n"
    "1,0,2016-01-01 01:00:00,abc\n"
    "0,3,2016-01-01 02:00:00,\n";

}  // namespace aead::test
