@problemName Tri
@timeStamps false
@univariate false
@dimensions 3
@equalLength true
@seriesLength 3
@classLabel true a b
@data
1,2,3:10,20,30:100,200,300:b
-1,-2,-3:0,0,0:7,8,9:a
