@seriesLength -3
@classLabel false
@data
