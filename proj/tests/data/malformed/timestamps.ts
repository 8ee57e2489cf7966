@classLabel true a
@timeStamps true
@data
